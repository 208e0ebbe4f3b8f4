#pragma once

#include <span>
#include <vector>

#include "lrd/common.hpp"
#include "lrd/ingest.hpp"
#include "lrd/scalefit.hpp"

namespace lrd {

/// Y(i) = sum_{t <= i} (X_t - mean X).
std::vector<double> profile(std::span<const double> returns);

/// RMS residual of a least-squares line through (i, segment[i-1]),
/// i = 1..n. Requires n >= 4.
double block_fluctuation(std::span<const double> segment);

/// DFA-1: F(n) is the simple mean of per-block fluctuations.
HurstAnalysis dfa_analysis(std::span<const double> returns);
inline HurstAnalysis dfa_analysis(const ReturnSeries& r) { return dfa_analysis(r.values); }

}  // namespace lrd
