#pragma once

#include <complex>
#include <span>
#include <vector>

namespace cavsim::optics {

/// Power coefficients of one mirror coating. R + T + A must equal 1.
struct MirrorSpec {
    double reflectivity = 1.0;  ///< R
    double transmission = 0.0;  ///< T
    double absorption = 0.0;    ///< A

    /// Mirror with given R and A; the remainder is transmission.
    static MirrorSpec lossy(double r, double a = 0.0) {
        return MirrorSpec{r, 1.0 - r - a, a};
    }

    double amplitude_r() const;  ///< r = sqrt(R)
    double amplitude_t() const;  ///< t = sqrt(T)
    void validate() const;
};

/// One microcavity + waveguide resonator pair sharing the coupling mirror.
/// All lengths in meters, gamma in rad/s. waveguide_length is the optical
/// length (refractive index folded in).
struct CompositeCavityGeometry {
    double cavity_length = 0.0;     ///< L_C
    double waveguide_length = 0.0;  ///< L_W (optical)
    double wavelength = 0.0;        ///< lambda
    MirrorSpec mirror_w;            ///< waveguide input mirror
    MirrorSpec mirror_cw;           ///< shared coupling mirror
    MirrorSpec mirror_c;            ///< concave microcavity mirror
    double waveguide_loss = 0.0;    ///< K_W, fractional power loss per round trip
    double mode_waist = 0.0;        ///< w0
    double atom_gamma = 0.0;        ///< atomic amplitude decay rate

    void validate() const;
    /// Round-trip amplitude survival factor sqrt(1 - K_W).
    double waveguide_amplitude_factor() const;
};

struct BareRates {
    double g_ac;     ///< maximum atom-photon coupling, rad/s
    double kappa_c;  ///< bare microcavity amplitude decay, rad/s
    double kappa_w;  ///< bare waveguide amplitude decay, rad/s
};

/// The microcavity folded into a single end mirror of the waveguide resonator.
struct EffectiveMirror {
    double r_tilde;  ///< amplitude reflection magnitude
    double theta;    ///< reflection phase, rad
};

/// Field amplitude ratios relative to the input field.
struct FieldResponse {
    std::complex<double> reflected;      ///< E_r / E_in
    std::complex<double> circulating_w;  ///< E_W / E_in
    std::complex<double> circulating_c;  ///< E_C / E_in
};

/// One composite-cavity eigenmode.
struct ResonanceMode {
    double omega;         ///< rad/s
    double kappa_tilde;   ///< amplitude decay rate, rad/s
    double g;             ///< rescaled atom-photon coupling, rad/s
    double cooperativity; ///< C1 = g^2 / (2 kappa_tilde gamma)
};

struct ZeroReflectionResult {
    bool feasible = false;
    double two_phi_c_opt = 0.0;  ///< optimal cavity round-trip phase, rad
    double phi_w_res = 0.0;      ///< waveguide phase satisfying the resonance condition, in [0, pi)
    double bound_low = 0.0;      ///< lower bound on r_W^2 for feasibility
    double bound_high = 0.0;     ///< upper bound on r_W^2 for feasibility
};

BareRates bare_rates(const CompositeCavityGeometry& geom);

EffectiveMirror effective_mirror(const CompositeCavityGeometry& geom, double phi_c);

/// Effective mirror along a phi_c scan with theta unwrapped to a continuous branch.
std::vector<EffectiveMirror> effective_mirror_scan(const CompositeCavityGeometry& geom,
                                                   std::span<const double> phi_c);

/// Response at explicit round-trip half-phases (phi_c, phi_w). The omega-based
/// overload evaluates phi = omega L / c.
FieldResponse composite_response(const CompositeCavityGeometry& geom, double phi_c,
                                 double phi_w);
FieldResponse composite_reflection(const CompositeCavityGeometry& geom, double omega);

ZeroReflectionResult zero_reflection_condition(const CompositeCavityGeometry& geom);

/// Locates reflection minima in [omega_lo, omega_hi] and evaluates per-mode
/// linewidth, rescaled coupling and cooperativity.
std::vector<ResonanceMode> mode_analysis(const CompositeCavityGeometry& geom,
                                         double omega_lo, double omega_hi,
                                         double g_ac);

struct GeometryRanges {
    double cavity_length_min = 0.0;
    double cavity_length_max = 0.0;
    double waveguide_length_min = 0.0;
    double waveguide_length_max = 0.0;
};

struct CooperativityOptimum {
    CompositeCavityGeometry geometry;
    ResonanceMode mode;
};

/// Searches lengths within the given ranges (mirrors fixed) for the geometry
/// maximizing C1 of the mode nearest atomic_omega, holding that mode resonant
/// with the atom to within kappa_tilde/10.
CooperativityOptimum optimize_cooperativity(const CompositeCavityGeometry& base,
                                            const GeometryRanges& ranges,
                                            double atomic_omega);

} // namespace cavsim::optics
