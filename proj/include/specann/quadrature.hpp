#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <span>
#include <vector>

namespace specann::quad {

/// Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half, centre first).
struct GK15 {
    static const double nodes[8];
    static const double kronrod_weights[8];
    static const double gauss_weights[4];
};

struct Options {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int intervals = 0;
    bool converged = true;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15_panel(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kron = fc * GK15::kronrod_weights[0];
    T gauss = fc * 0.0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * GK15::nodes[i];
        const T s = f(c - dx) + f(c + dx);
        kron += s * GK15::kronrod_weights[i];
        if (i % 2 == 0) gauss += s * GK15::gauss_weights[i / 2];
    }
    gauss += fc * GK15::gauss_weights[0];
    const T value = kron * h;
    const double err = magnitude((kron - gauss) * h);
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
///
/// `breaks` are interior points where f is known to be non-smooth; the
/// initial partition is split there.
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, std::span<const double> breaks = {}, const Options& opt = {}) {
    Result<T> res;
    if (!(b > a)) return res;
    std::vector<double> cuts{a};
    for (double x : breaks)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Panel<T>> heap;
    T total{};
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto p = detail::gk15_panel<T>(f, cuts[i], cuts[i + 1]);
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
        if (count >= opt.max_intervals) {
            res.converged = false;
            break;
        }
        auto worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) {
            res.converged = false;
            heap.push(worst);
            break;
        }
        auto l = detail::gk15_panel<T>(f, worst.a, m);
        auto r = detail::gk15_panel<T>(f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // re-sum to shed accumulated update drift
    T clean{};
    double clean_err = 0.0;
    while (!heap.empty()) {
        clean += heap.top().value;
        clean_err += heap.top().error;
        heap.pop();
    }
    res.value = clean;
    res.error = clean_err;
    res.intervals = count;
    return res;
}

}  // namespace specann::quad
