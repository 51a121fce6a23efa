#include "appshare/harness/stats.hpp"

#include "appshare/error.hpp"

#include <algorithm>
#include <cmath>

namespace appshare::harness {

double percentile(std::vector<double> samples, double p)
{
    if (samples.empty())
        return 0;
    std::sort(samples.begin(), samples.end());
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return samples[lo] + (samples[hi] - samples[lo]) * frac;
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
        throw Error(Errc::ParseError, "x and y lengths differ");
    if (xs.size() < 3)
        throw Error(Errc::TooFewRows, std::to_string(xs.size()) + " rows");

    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;

    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }

    LinearFit fit;
    fit.slope = sxx == 0 ? 0 : sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    const double scale = std::max(1.0, syy);
    if (ss_res <= 1e-12 * scale)
        fit.r_squared = 1;
    else
        fit.r_squared = syy == 0 ? 0 : 1 - ss_res / syy;
    return fit;
}

} // namespace appshare::harness
