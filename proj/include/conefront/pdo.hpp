#pragma once

#include "conefront/fields.hpp"
#include "conefront/symcalc.hpp"

namespace conefront {

/// How Op(a) is realized on a grid. Multiplier and x-multiplier symbols get
/// exact fast paths; everything else goes through the frequency-domain
/// quadrature  F(Op(a)f)(xi) = (2pi)^{-d/2} dxi^d sum_eta (F1 a)(xi-eta, eta) f^(eta)
/// with the first argument wrapped periodically into the Nyquist box.
struct OperatorPlan {
    enum class Mode { MultiplierFast, XMultiplierFast, FullQuadrature };

    SymbolSpec symbol;
    Grid grid;
    double t = 0.0;
    Mode mode = Mode::MultiplierFast;
    ArrayXc diag;                      // fast paths: a(xi) or a(x) on the grid
    Eigen::MatrixXcd f1a;              // full mode: column eta-index, row zeta-index

    static OperatorPlan build(const SymbolSpec& a, const Grid& g);
    SampledField apply(const SampledField& f) const;
};

/// Apply Op_t(a); t != 0 routes through convert_quantization onto the t=0 path.
SampledField apply_op(const SymbolSpec& a, const SampledField& f, double t = 0.0);

/// Dense kernel by direct quadrature of
///   K_{t,a}(x,y) = (2pi)^{-d/2} (F2^{-1} a)((1-t)x + t y, x - y).
/// Applying it with the h^d quadrature weight defines the oracle operator.
/// max_n guards cost, not correctness; the spec default is 16.
Eigen::MatrixXcd kernel_oracle(const SymbolSpec& a, double t, const Grid& g, Index max_n = 16);

SampledField apply_kernel(const Eigen::MatrixXcd& K, const SampledField& f);

/// Unique b with Op_s(a) = Op_t(b), computed by double FFT in (x, xi) and a
/// phase twist whose sign is pinned by the kernel-oracle calibration.
SymbolSpec convert_quantization(const SymbolSpec& a, double s, double t, const SymbolGrid& sg);

/// The calibrated sign: phase factor exp(i * sign * (s - t) <eta, y>).
/// Computed once per process; throws ConfigError if calibration fails.
int quantization_phase_sign();

}  // namespace conefront
