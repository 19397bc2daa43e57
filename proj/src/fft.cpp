#include "conefront/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace conefront::fft {

namespace {

Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

void raw_line(Complex* p, Index n, bool forward) {
    Eigen::VectorXcd in = Eigen::Map<Eigen::VectorXcd>(p, n);
    Eigen::VectorXcd out(n);
    if (forward) {
        fft_engine().fwd(out, in);
    } else {
        fft_engine().inv(out, in);  // scaled by 1/n
        out *= static_cast<double>(n);
    }
    Eigen::Map<Eigen::VectorXcd>(p, n) = out;
}

}  // namespace

void raw_fft(ArrayXc& line, bool forward) { raw_line(line.data(), line.size(), forward); }

void transform_axis(ArrayXc& data, const std::array<Index, 2>& shape, int ndim, int axis,
                    double spacing, double origin, bool forward) {
    const Index n = shape[axis];
    const double dxi = kTwoPi / (static_cast<double>(n) * spacing);
    const double scale = forward ? spacing / std::sqrt(kTwoPi) : dxi * static_cast<double>(n) / std::sqrt(kTwoPi);

    // phase[k]: forward multiplies output by exp(-i*origin*xi_k), inverse
    // multiplies input by exp(+i*origin*xi_k). The (-1)^m modulation realizes
    // the centered frequency ordering.
    ArrayXc phase(n);
    for (Index k = 0; k < n; ++k) {
        const double xi = (static_cast<double>(k) - static_cast<double>(n) / 2.0) * dxi;
        const double arg = origin * xi;
        phase[k] = forward ? Complex(std::cos(arg), -std::sin(arg)) : Complex(std::cos(arg), std::sin(arg));
    }

    const Index nlines = (ndim == 1) ? 1 : shape[1 - axis];
    const Index stride = (ndim == 1) ? 1 : (axis == 0 ? shape[1] : 1);
    const Index line_offset = (ndim == 1) ? 0 : (axis == 0 ? 1 : shape[1]);

    ArrayXc buf(n);
    for (Index l = 0; l < nlines; ++l) {
        Complex* base = data.data() + l * line_offset;
        if (forward) {
            for (Index m = 0; m < n; ++m) buf[m] = (m % 2 == 0 ? 1.0 : -1.0) * base[m * stride];
            raw_line(buf.data(), n, true);
            for (Index k = 0; k < n; ++k) base[k * stride] = scale * phase[k] * buf[k];
        } else {
            for (Index k = 0; k < n; ++k) buf[k] = phase[k] * base[k * stride];
            raw_line(buf.data(), n, false);
            buf /= static_cast<double>(n);
            for (Index m = 0; m < n; ++m) base[m * stride] = scale * (m % 2 == 0 ? 1.0 : -1.0) * buf[m];
        }
    }
}

void transform_dim4(ArrayXc& v, const std::array<Index, 4>& shape, int dim, double spacing,
                    double origin, bool forward) {
    const Index n = shape[dim];
    if (n == 1) throw DomainError("transform_dim4: degenerate dimension");
    std::array<Index, 4> strides;
    strides[3] = 1;
    for (int k = 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];
    const double dxi = kTwoPi / (static_cast<double>(n) * spacing);
    const double scale = forward ? spacing / std::sqrt(kTwoPi) : dxi / std::sqrt(kTwoPi);

    ArrayXc phase(n);
    for (Index k = 0; k < n; ++k) {
        const double xi = (static_cast<double>(k) - static_cast<double>(n) / 2.0) * dxi;
        const double arg = origin * xi;
        phase[k] = forward ? Complex(std::cos(arg), -std::sin(arg)) : Complex(std::cos(arg), std::sin(arg));
    }

    ArrayXc buf(n);
    const Index n_lines = v.size() / n;
    for (Index l = 0; l < n_lines; ++l) {
        Index rem = l, base = 0;
        for (int k = 3; k >= 0; --k) {
            if (k == dim) continue;
            const Index ik = rem % shape[k];
            rem /= shape[k];
            base += ik * strides[k];
        }
        if (forward) {
            for (Index m = 0; m < n; ++m) buf[m] = (m % 2 == 0 ? 1.0 : -1.0) * v[base + m * strides[dim]];
            raw_fft(buf, true);
            for (Index k = 0; k < n; ++k) v[base + k * strides[dim]] = scale * phase[k] * buf[k];
        } else {
            for (Index k = 0; k < n; ++k) buf[k] = phase[k] * v[base + k * strides[dim]];
            raw_fft(buf, false);
            for (Index m = 0; m < n; ++m)
                v[base + m * strides[dim]] = scale * (m % 2 == 0 ? 1.0 : -1.0) * buf[m];
        }
    }
}

ArrayXc forward_grid(const Grid& g, const ArrayXc& values) {
    ArrayXc out = values;
    for (int a = 0; a < g.dim; ++a) transform_axis(out, g.shape, g.dim, a, g.spacing[a], g.origin[a], true);
    return out;
}

ArrayXc inverse_grid(const Grid& g, const ArrayXc& values) {
    ArrayXc out = values;
    for (int a = 0; a < g.dim; ++a) transform_axis(out, g.shape, g.dim, a, g.spacing[a], g.origin[a], false);
    return out;
}

}  // namespace conefront::fft
