#ifndef PROXDIFF_BENCH_CSV_HPP
#define PROXDIFF_BENCH_CSV_HPP

#include <string>

#include "proxdiff/bench/experiment.hpp"

namespace proxdiff {

// Writes `iter,pgd_x,...,apg_rev_fpad` with one row per iteration; values in
// scientific notation with 17 significant digits, which round-trips doubles
// exactly. I/O failures raise std::runtime_error naming the path.
void emit_csv(const ErrorCurves& curves, const std::string& path);

// Inverse of emit_csv; validates the header.
ErrorCurves read_csv(const std::string& path);

}  // namespace proxdiff

#endif
