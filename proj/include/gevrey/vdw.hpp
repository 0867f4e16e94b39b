#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gevrey/errors.hpp"
#include "gevrey/normalform.hpp"
#include "gevrey/symbol.hpp"

namespace gevrey {

struct VdwCrossing {
    double u = 0;        // boundary point of the elliptic zone
    double velocity = 0; // sign chosen so that u1 = u + v t enters the zone
    TransitionClassification cls;
    std::optional<NormalFormData> nf;
};

struct VdwReport {
    std::vector<double> pprime;
    std::vector<std::pair<double, double>> elliptic; // intervals where p' < 0, i.e. Delta = -p' > 0
    std::vector<VdwCrossing> crossings;
    TransitionKind inside = TransitionKind::no_transition;  // classification at an interior point
    TransitionKind outside = TransitionKind::no_transition; // classification at a hyperbolic point
    double inside_u = NAN, outside_u = NAN;
};

namespace vdw_detail {

inline double poly_deriv(const std::vector<double>& c, double u)
{
    double v = 0;
    for (std::size_t i = c.size(); i-- > 1;) v = v * u + static_cast<double>(i) * c[i];
    return v;
}

inline double bisect(const std::vector<double>& c, double a, double b)
{
    double fa = poly_eval(c, a);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = poly_eval(c, m);
        if (fm == 0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace vdw_detail

// Elliptic zone of the Euler system with pressure derivative p' on [lo, hi], and the
// classification of the paths entering it at each boundary point.
inline VdwReport vdw_report(const std::vector<double>& pprime, double lo, double hi, double speed = 1.0,
                            int samples = 4001, Truncation tr = {})
{
    if (pprime.empty()) throw Error(ErrorCode::argument, "p' needs at least one coefficient");
    if (!(hi > lo) || samples < 3 || !(speed > 0)) throw Error(ErrorCode::argument, "bad demo range");
    VdwReport rep;
    rep.pprime = pprime;
    std::vector<double> roots;
    double prev_u = lo, prev = poly_eval(pprime, lo);
    for (int i = 1; i < samples; ++i) {
        const double u = lo + (hi - lo) * i / (samples - 1);
        const double f = poly_eval(pprime, u);
        if ((f < 0) != (prev < 0)) roots.push_back(vdw_detail::bisect(pprime, prev_u, u));
        prev_u = u;
        prev = f;
    }
    // p' < 0 between consecutive sign changes
    std::vector<double> cuts{lo};
    cuts.insert(cuts.end(), roots.begin(), roots.end());
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (poly_eval(pprime, 0.5 * (cuts[i] + cuts[i + 1])) < 0) rep.elliptic.emplace_back(cuts[i], cuts[i + 1]);

    for (double r : roots) {
        VdwCrossing c;
        c.u = r;
        // p' must decrease along the path
        const double slope = vdw_detail::poly_deriv(pprime, r);
        c.velocity = slope > 0 ? -speed : speed;
        const auto sys = vdw_system(pprime, r, c.velocity, tr);
        c.cls = classify_transition(sys);
        if (c.cls.kind == TransitionKind::smooth || c.cls.kind == TransitionKind::stiff)
            c.nf = normal_form(sys, c.cls);
        rep.crossings.push_back(std::move(c));
    }
    if (!rep.elliptic.empty()) {
        const auto& [a, b] = rep.elliptic.front();
        rep.inside_u = 0.5 * (a + b);
        rep.inside = classify_transition(vdw_system(pprime, rep.inside_u, speed, tr)).kind;
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (poly_eval(pprime, 0.5 * (cuts[i] + cuts[i + 1])) > 0) {
            rep.outside_u = 0.5 * (cuts[i] + cuts[i + 1]);
            rep.outside = classify_transition(vdw_system(pprime, rep.outside_u, speed, tr)).kind;
            break;
        }
    return rep;
}

} // namespace gevrey
