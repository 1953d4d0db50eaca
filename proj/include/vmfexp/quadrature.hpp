#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace vmfexp::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// 15-point Kronrod nodes on [0, 1]; odd indices are the embedded 7-point Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    Result r;
    bool operator<(const Segment& o) const { return r.error < o.r.error; }
};

template <class F>
Result gauss_kronrod(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrod[7];
    double gauss = fc * kGauss[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrod[j] * sum;
        if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) over [a, b]. Interior breakpoints,
/// if given, seed the initial partition (peaks, kinks).
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                 const std::vector<double>& breakpoints = {}, int max_segments = 4000) {
    if (a == b) return {};
    std::vector<double> edges{a};
    for (double p : breakpoints) {
        if (p > std::min(a, b) && p < std::max(a, b)) edges.push_back(p);
    }
    edges.push_back(b);
    if (a < b) {
        std::sort(edges.begin() + 1, edges.end() - 1);
    } else {
        std::sort(edges.begin() + 1, edges.end() - 1, std::greater<>());
    }

    std::priority_queue<detail::Segment> heap;
    Result total;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        detail::Segment s{edges[i], edges[i + 1], detail::gauss_kronrod(f, edges[i], edges[i + 1])};
        total.value += s.r.value;
        total.error += s.r.error;
        heap.push(s);
    }
    int segments = static_cast<int>(heap.size());
    while (total.error > std::max(abs_tol, rel_tol * std::abs(total.value)) &&
           segments < max_segments) {
        const detail::Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) break;
        heap.pop();
        const detail::Segment left{worst.a, mid, detail::gauss_kronrod(f, worst.a, mid)};
        const detail::Segment right{mid, worst.b, detail::gauss_kronrod(f, mid, worst.b)};
        total.value += left.r.value + right.r.value - worst.r.value;
        total.error += left.r.error + right.r.error - worst.r.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Re-sum from the leaves so the running updates leave no drift behind.
    Result exact;
    while (!heap.empty()) {
        exact.value += heap.top().r.value;
        exact.error += heap.top().r.error;
        heap.pop();
    }
    return exact;
}

}  // namespace vmfexp::quad
