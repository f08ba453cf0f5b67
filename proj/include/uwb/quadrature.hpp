#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace uwb {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // achieved absolute error estimate
    bool converged = true;
    long evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 node/weight table (abscissa, Gauss weight, Kronrod weight).
inline constexpr double gk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class F>
double gk15_panel(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = gk15[0][1] * f0;
    double k15 = gk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += gk15[i][1] * fi;
        k15 += gk15[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;
    const double diff = std::fabs(k15 - g7);
    err = 200.0 * diff * std::sqrt(200.0 * diff);  // standard (200|K-G|)^(3/2) estimate
    if (!(err < std::fabs(k15))) err = std::fabs(k15 - g7);
    return k15;
}

}  // namespace detail

// Adaptive bisection on top of the 7-15 pair. Converges when the summed panel
// error estimates satisfy the relative or absolute tolerance; if the interval
// budget runs out the result is still returned with converged=false and the
// achieved error estimate.
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-8,
                     double abs_tol = 1e-300, int max_intervals = 4000) {
    QuadResult out;
    if (a == b) return out;

    struct Panel {
        double a, b, value, error;
    };
    std::vector<Panel> worklist;
    double err0;
    double v0 = detail::gk15_panel(f, a, b, err0);
    out.evaluations = 15;
    worklist.push_back({a, b, v0, err0});

    double total_value = v0;
    double total_error = err0;
    int splits = 0;
    while (!worklist.empty()) {
        const double tol = std::max(abs_tol, rel_tol * std::fabs(total_value));
        if (total_error <= tol) break;
        // split the worst panel
        size_t worst = 0;
        for (size_t i = 1; i < worklist.size(); ++i)
            if (worklist[i].error > worklist[worst].error) worst = i;
        Panel p = worklist[worst];
        worklist.erase(worklist.begin() + static_cast<long>(worst));
        if (++splits > max_intervals) {
            worklist.push_back(p);
            out.converged = false;
            break;
        }
        const double mid = 0.5 * (p.a + p.b);
        double el, er;
        const double vl = detail::gk15_panel(f, p.a, mid, el);
        const double vr = detail::gk15_panel(f, mid, p.b, er);
        out.evaluations += 30;
        total_value += vl + vr - p.value;
        total_error += el + er - p.error;
        worklist.push_back({p.a, mid, vl, el});
        worklist.push_back({mid, p.b, vr, er});
    }
    out.value = total_value;
    out.error = total_error;
    return out;
}

}  // namespace uwb
