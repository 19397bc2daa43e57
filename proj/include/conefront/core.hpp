#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conefront {

using Complex = std::complex<double>;
using ArrayXc = Eigen::ArrayXcd;
using ArrayXd = Eigen::ArrayXd;
using Index = Eigen::Index;

// Points in R^d for d <= 2, padded with zeros beyond dim.
using Pt = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedWeightError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct InsufficientResolutionError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

/// Uniform periodic grid, d in {1,2}, row-major storage, even samples per axis.
/// Frequencies are centered: xi_n = (n - N/2) * dxi with dxi = 2*pi/(N*h).
struct Grid {
    int dim = 1;
    std::array<Index, 2> shape{1, 1};
    std::array<double, 2> spacing{1.0, 1.0};
    std::array<double, 2> origin{0.0, 0.0};

    static Grid make(int d, std::array<Index, 2> n, std::array<double, 2> h,
                     std::array<double, 2> x0) {
        Grid g{d, n, h, x0};
        g.validate();
        return g;
    }
    static Grid line(Index n, double x_min, double x_max) {
        return make(1, {n, 1}, {(x_max - x_min) / static_cast<double>(n), 1.0}, {x_min, 0.0});
    }
    static Grid square(Index n, double x_min, double x_max) {
        const double h = (x_max - x_min) / static_cast<double>(n);
        return make(2, {n, n}, {h, h}, {x_min, x_min});
    }

    void validate() const {
        if (dim < 1 || dim > 2) throw DomainError("grid dim must be 1 or 2");
        for (int a = 0; a < dim; ++a) {
            if (shape[a] < 4 || shape[a] % 2 != 0)
                throw DomainError("grid shape must be even and >= 4 per axis");
            if (!(spacing[a] > 0.0)) throw DomainError("grid spacing must be positive");
        }
    }

    Index size() const {
        Index n = 1;
        for (int a = 0; a < dim; ++a) n *= shape[a];
        return n;
    }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing[a];
        return v;
    }
    double freq_spacing(int axis) const {
        return kTwoPi / (static_cast<double>(shape[axis]) * spacing[axis]);
    }
    double freq_min(int axis) const { return -kPi / spacing[axis]; }
    double freq_cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= freq_spacing(a);
        return v;
    }
    double nyquist() const {
        double m = kPi / spacing[0];
        for (int a = 1; a < dim; ++a) m = std::min(m, kPi / spacing[a]);
        return m;
    }
    double coord(int axis, Index i) const { return origin[axis] + spacing[axis] * static_cast<double>(i); }
    double freq(int axis, Index i) const { return freq_min(axis) + freq_spacing(axis) * static_cast<double>(i); }
    double x_min(int axis) const { return origin[axis]; }
    double x_max(int axis) const { return origin[axis] + spacing[axis] * static_cast<double>(shape[axis]); }

    Index flat(Index i0, Index i1 = 0) const { return dim == 1 ? i0 : i0 * shape[1] + i1; }
    std::array<Index, 2> unflat(Index k) const {
        return dim == 1 ? std::array<Index, 2>{k, 0} : std::array<Index, 2>{k / shape[1], k % shape[1]};
    }
    Pt point(Index k) const {
        auto ij = unflat(k);
        Pt p = Pt::Zero();
        for (int a = 0; a < dim; ++a) p[a] = coord(a, ij[a]);
        return p;
    }
    Pt freq_point(Index k) const {
        auto ij = unflat(k);
        Pt p = Pt::Zero();
        for (int a = 0; a < dim; ++a) p[a] = freq(a, ij[a]);
        return p;
    }
    /// Nearest grid index to a physical point.
    std::array<Index, 2> nearest(const Pt& x) const {
        std::array<Index, 2> ij{0, 0};
        for (int a = 0; a < dim; ++a) {
            auto i = static_cast<Index>(std::llround((x[a] - origin[a]) / spacing[a]));
            if (i < 0 || i >= shape[a]) throw DomainError("point outside grid");
            ij[a] = i;
        }
        return ij;
    }
    bool same_geometry(const Grid& o, double tol = 1e-12) const {
        if (dim != o.dim) return false;
        for (int a = 0; a < dim; ++a) {
            if (shape[a] != o.shape[a]) return false;
            if (std::abs(spacing[a] - o.spacing[a]) > tol * spacing[a]) return false;
            if (std::abs(origin[a] - o.origin[a]) > tol * (std::abs(origin[a]) + 1.0)) return false;
        }
        return true;
    }
};

/// Least-squares slope of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    int n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(i) for i in [0, n). Thread count is capped by CONEFRONT_THREADS.
void parallel_for(Index n, const std::function<void(Index)>& fn);
int thread_cap();

}  // namespace conefront
