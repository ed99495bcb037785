#pragma once

// Discounting helpers shared by the objective builder and the metrics.

#include <cassert>
#include <cmath>

#include "gridplan/scenario.hpp"

namespace gridplan {

// Weight applied to the operating costs of an epoch: the modeled year
// stands in for every year of the epoch, so the weight is the sum of the
// per-year discount factors across the epoch.
inline double epoch_weight(double r, const EpochSpec& epoch)
{
    assert(r >= 0.0);
    double w = 0.0;
    for (int t = epoch.start_year_offset; t <= epoch.operating_year_offset(); ++t) {
        w += std::pow(1.0 + r, -t);
    }
    return w;
}

// Capital invested at the start of an epoch is paid as an annualized cost
// in every year from the investment year through the end of the horizon,
// discounted back to the model start.
inline double discounted_investment_cost(double annualized_cost, const EpochSpec& epoch,
                                         int horizon_end_year, double r)
{
    assert(annualized_cost >= 0.0);
    assert(epoch.start_year_offset <= horizon_end_year);
    double f = 0.0;
    for (int t = epoch.start_year_offset; t <= horizon_end_year; ++t) {
        f += std::pow(1.0 + r, -t);
    }
    return annualized_cost * f;
}

} // namespace gridplan
