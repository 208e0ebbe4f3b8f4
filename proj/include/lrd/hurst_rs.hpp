#pragma once

#include <span>
#include <vector>

#include "lrd/common.hpp"
#include "lrd/ingest.hpp"
#include "lrd/scalefit.hpp"

namespace lrd {

/// Raised for a block with zero variance; rs_analysis skips such blocks.
class DegenerateBlockError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// R/S of one block: range of the cumulative mean-deviations over the
/// population (1/n) standard deviation.
double rs_statistic(std::span<const double> block);

/// Mean R/S per schedule scale over left-aligned non-overlapping blocks (the
/// partial tail is dropped), regressed on ln n.
HurstAnalysis rs_analysis(std::span<const double> returns);
inline HurstAnalysis rs_analysis(const ReturnSeries& r) { return rs_analysis(r.values); }

}  // namespace lrd
