#include "cavsim/cavity_optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cavsim/errors.hpp"
#include "cavsim/units.hpp"

namespace cavsim::optics {

namespace {

constexpr double kGolden = 0.6180339887498949;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// libm's sincos is very slow for arguments ~1e8 rad (optical round-trip
// phases); reduce into [-pi, pi] first
std::complex<double> unit_phase(double phi) {
    return std::polar(1.0, std::remainder(phi, two_pi));
}

/// Golden-section minimization on a bracket [a, b]. The tolerance is floored
/// at a few ulp of the abscissa so the loop terminates for large arguments.
template <class F>
double golden_minimize(F&& f, double a, double b, double xtol) {
    xtol = std::max(xtol, 8.0 * std::numeric_limits<double>::epsilon() *
                              std::max(std::abs(a), std::abs(b)));
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

double MirrorSpec::amplitude_r() const { return std::sqrt(reflectivity); }
double MirrorSpec::amplitude_t() const { return std::sqrt(transmission); }

void MirrorSpec::validate() const {
    for (double v : {reflectivity, transmission, absorption}) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw invalid_parameter("mirror coefficients must lie in [0,1]");
    }
    if (std::abs(reflectivity + transmission + absorption - 1.0) > 1e-12)
        throw invalid_parameter("mirror coefficients must satisfy R + T + A = 1");
}

void CompositeCavityGeometry::validate() const {
    mirror_w.validate();
    mirror_cw.validate();
    mirror_c.validate();
    if (!std::isfinite(cavity_length) || !std::isfinite(waveguide_length) ||
        !(cavity_length > 0.0) || !(waveguide_length > cavity_length))
        throw invalid_parameter("geometry requires L_W > L_C > 0");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw invalid_parameter("wavelength must be positive");
    if (!finite_nonneg(waveguide_loss) || waveguide_loss >= 1.0)
        throw invalid_parameter("waveguide round-trip loss must lie in [0,1)");
    if (!(mode_waist > 0.0) || !std::isfinite(mode_waist))
        throw invalid_parameter("mode waist must be positive");
    if (!finite_nonneg(atom_gamma))
        throw invalid_parameter("atomic decay rate must be non-negative");
}

double CompositeCavityGeometry::waveguide_amplitude_factor() const {
    return std::sqrt(1.0 - waveguide_loss);
}

BareRates bare_rates(const CompositeCavityGeometry& geom) {
    geom.validate();
    if (!(geom.atom_gamma > 0.0))
        throw invalid_parameter("bare_rates requires a positive atomic decay rate");
    const double c = speed_of_light;
    const double g_ac = std::sqrt(3.0 * c * geom.wavelength * geom.wavelength *
                                  geom.atom_gamma /
                                  (pi * pi * geom.mode_waist * geom.mode_waist *
                                   geom.cavity_length));
    const double xi_c = 0.5 * (geom.mirror_c.transmission + geom.mirror_c.absorption +
                               geom.mirror_cw.transmission + geom.mirror_cw.absorption);
    const double xi_w = 0.5 * (geom.mirror_w.transmission + geom.mirror_w.absorption +
                               geom.mirror_cw.transmission + geom.mirror_cw.absorption +
                               geom.waveguide_loss);
    return BareRates{g_ac, c * xi_c / (2.0 * geom.cavity_length),
                     c * xi_w / (2.0 * geom.waveguide_length)};
}

EffectiveMirror effective_mirror(const CompositeCavityGeometry& geom, double phi_c) {
    const double r_c = geom.mirror_c.amplitude_r();
    const double r_cw = geom.mirror_cw.amplitude_r();
    const std::complex<double> phase = unit_phase(2.0 * phi_c);
    const std::complex<double> ratio = (r_cw - r_c * phase) / (1.0 - r_cw * r_c * phase);
    return EffectiveMirror{std::abs(ratio), std::arg(ratio)};
}

std::vector<EffectiveMirror> effective_mirror_scan(const CompositeCavityGeometry& geom,
                                                   std::span<const double> phi_c) {
    std::vector<EffectiveMirror> out;
    out.reserve(phi_c.size());
    double offset = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < phi_c.size(); ++i) {
        EffectiveMirror m = effective_mirror(geom, phi_c[i]);
        if (i > 0) {
            double d = m.theta + offset - prev;
            while (d > pi) {
                offset -= two_pi;
                d -= two_pi;
            }
            while (d < -pi) {
                offset += two_pi;
                d += two_pi;
            }
        }
        m.theta += offset;
        prev = m.theta;
        out.push_back(m);
    }
    return out;
}

FieldResponse composite_response(const CompositeCavityGeometry& geom, double phi_c,
                                 double phi_w) {
    const double r_c = geom.mirror_c.amplitude_r();
    const double r_cw = geom.mirror_cw.amplitude_r();
    const double r_w = geom.mirror_w.amplitude_r();
    const double t_w = geom.mirror_w.amplitude_t();
    const double t_cw = geom.mirror_cw.amplitude_t();
    const double sigma = geom.waveguide_amplitude_factor();

    const std::complex<double> e2ic = unit_phase(2.0 * phi_c);
    const std::complex<double> e2iw = sigma * unit_phase(2.0 * phi_w);
    const std::complex<double> eiw =
        std::sqrt(sigma) * unit_phase(phi_w);

    const std::complex<double> rt_c =
        (r_cw - r_c * e2ic) / (1.0 - r_cw * r_c * e2ic);

    FieldResponse resp;
    resp.reflected = (r_w - rt_c * e2iw) / (1.0 - r_w * rt_c * e2iw);
    resp.circulating_w = t_w / (1.0 - r_w * rt_c * e2iw);
    resp.circulating_c =
        t_cw * t_w * eiw /
        (1.0 - r_c * r_cw * e2ic + r_c * r_w * e2ic * e2iw - r_cw * r_w * e2iw);
    return resp;
}

FieldResponse composite_reflection(const CompositeCavityGeometry& geom, double omega) {
    if (!(omega > 0.0))
        throw invalid_parameter("composite_reflection requires omega > 0");
    const double phi_c = omega * geom.cavity_length / speed_of_light;
    const double phi_w = omega * geom.waveguide_length / speed_of_light;
    return composite_response(geom, phi_c, phi_w);
}

ZeroReflectionResult zero_reflection_condition(const CompositeCavityGeometry& geom) {
    geom.validate();
    const double r_c = geom.mirror_c.amplitude_r();
    const double r_cw = geom.mirror_cw.amplitude_r();
    const double rw2 = geom.mirror_w.reflectivity;

    ZeroReflectionResult res;
    const double dmin = 1.0 - r_c * r_cw;
    res.bound_low = (r_c - r_cw) * (r_c - r_cw) / (dmin * dmin);
    res.bound_high = (r_c * r_c + r_cw * r_cw) / (1.0 + r_c * r_c * r_cw * r_cw);
    res.feasible = rw2 >= res.bound_low - 1e-15 && rw2 <= res.bound_high + 1e-15;
    if (!res.feasible) return res;

    const double denom = 2.0 * r_cw * r_c * (rw2 - 1.0);
    if (std::abs(denom) < 1e-300) {
        // degenerate (r_C = 0 or r_W = 1): r_tilde does not depend on phi_c
        res.two_phi_c_opt = pi;
    } else {
        const double arg = (rw2 * (1.0 + r_c * r_c * r_cw * r_cw) -
                            (r_c * r_c + r_cw * r_cw)) /
                           denom;
        res.two_phi_c_opt = std::acos(std::clamp(arg, -1.0, 1.0));
    }
    const double theta = effective_mirror(geom, 0.5 * res.two_phi_c_opt).theta;
    double phi_w = -0.5 * theta;
    phi_w -= pi * std::floor(phi_w / pi);
    res.phi_w_res = phi_w;
    return res;
}

namespace {

double reflected_intensity(const CompositeCavityGeometry& geom, double omega) {
    const std::complex<double> r = composite_reflection(geom, omega).reflected;
    return std::norm(r);
}

ResonanceMode mode_at(const CompositeCavityGeometry& geom, double omega, double g_ac) {
    const double phi_c = omega * geom.cavity_length / speed_of_light;
    const EffectiveMirror em = effective_mirror(geom, phi_c);
    const double r_w = geom.mirror_w.amplitude_r();
    const double sigma = geom.waveguide_amplitude_factor();
    const double kappa = speed_of_light * (1.0 - r_w * em.r_tilde * sigma) /
                         (2.0 * geom.waveguide_length);
    const FieldResponse f = composite_reflection(geom, omega);
    const double ec2 = std::norm(f.circulating_c);
    const double ew2 = std::norm(f.circulating_w);
    const double ratio =
        ec2 / (ec2 + geom.waveguide_length / geom.cavity_length * ew2);
    const double g = g_ac * std::sqrt(std::max(ratio, 0.0));
    const double c1 = (geom.atom_gamma > 0.0) ? g * g / (2.0 * kappa * geom.atom_gamma)
                                              : 0.0;
    return ResonanceMode{omega, kappa, g, c1};
}

} // namespace

std::vector<ResonanceMode> mode_analysis(const CompositeCavityGeometry& geom,
                                         double omega_lo, double omega_hi,
                                         double g_ac) {
    geom.validate();
    std::vector<ResonanceMode> modes;
    if (!(omega_hi > omega_lo)) return modes;

    // narrowest conceivable dip sets the scan resolution: r_tilde at its
    // feasibility maximum gives the smallest kappa
    const double r_w = geom.mirror_w.amplitude_r();
    const double sigma = geom.waveguide_amplitude_factor();
    const double r_c = geom.mirror_c.amplitude_r();
    const double r_cw = geom.mirror_cw.amplitude_r();
    const double rt_max = std::sqrt((r_c * r_c + r_cw * r_cw) /
                                    (1.0 + r_c * r_c * r_cw * r_cw));
    const double kappa_min = speed_of_light * (1.0 - r_w * rt_max * sigma) /
                             (2.0 * geom.waveguide_length);
    const double step = std::max(kappa_min / 10.0, (omega_hi - omega_lo) / 4e7);
    const auto n = static_cast<std::size_t>(std::ceil((omega_hi - omega_lo) / step)) + 1;

    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i)
        vals[i] = reflected_intensity(geom, omega_lo + static_cast<double>(i) * step);

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] &&
            (vals[i] < vals[i - 1] || vals[i] < vals[i + 1])) {
            const double a = omega_lo + static_cast<double>(i - 1) * step;
            const double b = omega_lo + static_cast<double>(i + 1) * step;
            const double w = golden_minimize(
                [&](double x) { return reflected_intensity(geom, x); }, a, b,
                step * 1e-4);
            ResonanceMode cand = mode_at(geom, w, g_ac);
            // flat dip bottoms can flag several samples; merge anything
            // closer than half a linewidth into one mode
            if (!modes.empty()) {
                ResonanceMode& prev = modes.back();
                if (std::abs(prev.omega - w) <
                    0.5 * std::max(prev.kappa_tilde, cand.kappa_tilde)) {
                    if (reflected_intensity(geom, w) <
                        reflected_intensity(geom, prev.omega))
                        prev = cand;
                    continue;
                }
            }
            modes.push_back(cand);
        }
    }
    return modes;
}

namespace {

struct SlavedPoint {
    CompositeCavityGeometry geom;
    ResonanceMode mode;
    bool valid = false;
};

/// With L_C fixed, pick L_W so that the composite resonance condition
/// 2 phi_W + theta = 2 pi n holds exactly at omega; then the mode sits at
/// omega by construction.
SlavedPoint evaluate_slaved(const CompositeCavityGeometry& base, double cavity_len,
                            double wg_min, double wg_max, double omega,
                            double g_ac) {
    SlavedPoint pt;
    CompositeCavityGeometry geom = base;
    geom.cavity_length = cavity_len;

    const double phi_c = omega * cavity_len / speed_of_light;
    const double theta = effective_mirror(geom, phi_c).theta;
    const double c = speed_of_light;

    const double center = 0.5 * (wg_min + wg_max);
    const double n_center = (2.0 * omega * center / c + theta) / two_pi;
    double best_c1 = -1.0;
    for (double n : {std::floor(n_center), std::ceil(n_center)}) {
        const double lw = (two_pi * n - theta) * c / (2.0 * omega);
        if (!(lw >= wg_min && lw <= wg_max && lw > cavity_len)) continue;
        geom.waveguide_length = lw;
        const ResonanceMode m = mode_at(geom, omega, g_ac);
        if (m.cooperativity > best_c1) {
            best_c1 = m.cooperativity;
            pt.geom = geom;
            pt.mode = m;
            pt.valid = true;
        }
    }
    return pt;
}

} // namespace

CooperativityOptimum optimize_cooperativity(const CompositeCavityGeometry& base,
                                            const GeometryRanges& ranges,
                                            double atomic_omega) {
    if (!(ranges.cavity_length_min > 0.0) ||
        ranges.cavity_length_max < ranges.cavity_length_min ||
        !(ranges.waveguide_length_min > 0.0) ||
        ranges.waveguide_length_max < ranges.waveguide_length_min)
        throw invalid_parameter("optimize_cooperativity: empty or inverted length ranges");
    if (!(atomic_omega > 0.0))
        throw invalid_parameter("optimize_cooperativity: atomic frequency must be positive");

    const double lam = base.wavelength;
    const double lc_lo = ranges.cavity_length_min;
    const double lc_hi = ranges.cavity_length_max;
    const bool lc_collapsed = (lc_hi - lc_lo) < 1e-15;
    const bool lw_collapsed =
        (ranges.waveguide_length_max - ranges.waveguide_length_min) < 1e-15;

    auto evaluate = [&](double lc) -> SlavedPoint {
        if (lw_collapsed) {
            SlavedPoint pt;
            CompositeCavityGeometry geom = base;
            geom.cavity_length = lc;
            geom.waveguide_length = ranges.waveguide_length_min;
            const double fsr_w =
                pi * speed_of_light / geom.waveguide_length;
            auto modes = mode_analysis(geom, atomic_omega - 0.55 * fsr_w,
                                       atomic_omega + 0.55 * fsr_w,
                                       bare_rates(geom).g_ac);
            if (modes.empty()) return pt;
            const auto it = std::min_element(
                modes.begin(), modes.end(), [&](const auto& a, const auto& b) {
                    return std::abs(a.omega - atomic_omega) <
                           std::abs(b.omega - atomic_omega);
                });
            pt.geom = geom;
            pt.mode = *it;
            pt.valid = true;
            return pt;
        }
        CompositeCavityGeometry probe = base;
        probe.cavity_length = lc;
        return evaluate_slaved(base, lc, ranges.waveguide_length_min,
                               ranges.waveguide_length_max, atomic_omega,
                               bare_rates(probe).g_ac);
    };

    SlavedPoint best;
    double best_lc = lc_lo;
    if (lc_collapsed) {
        best = evaluate(lc_lo);
    } else {
        // hierarchical grid: the cooperativity landscape is lambda/2-periodic in
        // L_C with a slow macroscopic envelope
        const double cell = lam / 2.0;
        const double width = lc_hi - lc_lo;
        const int n_macro = std::min(64, std::max(1, static_cast<int>(width / cell)));
        const double macro_step = width / n_macro;
        for (int m = 0; m < n_macro; ++m) {
            const double cell_lo = lc_lo + m * macro_step;
            const double cell_w = std::min(macro_step, cell);
            const int n_micro = 64;
            for (int i = 0; i <= n_micro; ++i) {
                const double lc = cell_lo + cell_w * i / n_micro;
                if (lc > lc_hi) break;
                SlavedPoint pt = evaluate(lc);
                if (pt.valid && (!best.valid ||
                                 pt.mode.cooperativity > best.mode.cooperativity)) {
                    best = pt;
                    best_lc = lc;
                }
            }
        }
        if (best.valid) {
            const double half = std::min({lam / 128.0, best_lc - lc_lo, lc_hi - best_lc});
            if (half > 0.0) {
                const double refined = golden_minimize(
                    [&](double lc) {
                        SlavedPoint pt = evaluate(lc);
                        return pt.valid ? -pt.mode.cooperativity : 1e300;
                    },
                    best_lc - half, best_lc + half, lam * 1e-9);
                SlavedPoint pt = evaluate(refined);
                if (pt.valid && pt.mode.cooperativity > best.mode.cooperativity)
                    best = pt;
            }
        }
    }

    if (!best.valid)
        throw solver_error("optimize_cooperativity: no resonant geometry found in range");

    // confirm against an honest scan of the final geometry and return the
    // scanned mode nearest the atom
    const double kappa = std::max(best.mode.kappa_tilde, 1.0);
    auto modes = mode_analysis(best.geom, atomic_omega - 60.0 * kappa,
                               atomic_omega + 60.0 * kappa,
                               bare_rates(best.geom).g_ac);
    if (!modes.empty()) {
        const auto it = std::min_element(
            modes.begin(), modes.end(), [&](const auto& a, const auto& b) {
                return std::abs(a.omega - atomic_omega) <
                       std::abs(b.omega - atomic_omega);
            });
        best.mode = *it;
    }
    return CooperativityOptimum{best.geom, best.mode};
}

} // namespace cavsim::optics
