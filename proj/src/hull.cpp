#include "rdd/hull.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "rdd/error.hpp"

namespace rdd::hull {

namespace {

using cplx = std::complex<double>;

// Moments of the linear hat functions against exp(-theta * tau) on [0, 1]:
//   near = int tau exp(-theta tau), far = int (1 - tau) exp(-theta tau).
template <class T>
void hat_moments(T theta, T& near, T& far) {
    if (std::abs(theta) < 0.5) {
        // Power series; 14 terms are exact to rounding for |theta| < 0.5.
        T term = T(1.0);
        near = T(0.0);
        far = T(0.0);
        for (int n = 0; n < 14; ++n) {
            near += term / static_cast<double>(n + 2);
            far += term / static_cast<double>((n + 1) * (n + 2));
            term *= -theta / static_cast<double>(n + 1);
        }
        return;
    }
    const T e = std::exp(-theta);
    const T th2 = theta * theta;
    near = (T(1.0) - e * (T(1.0) + theta)) / th2;
    far = (theta - T(1.0) + e) / th2;
}

// Node grid over [a, b] with the given breakpoints; every segment gets a
// uniform spacing and at least `min_per_segment` intervals.
struct Segment {
    double a, b;
    std::size_t intervals;
};

std::vector<Segment> split_segments(std::vector<double> breaks, std::size_t total, std::size_t min_per_segment) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<Segment> segs;
    const double span = breaks.back() - breaks.front();
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double len = breaks[i + 1] - breaks[i];
        if (!(len > 0.0)) continue;
        auto n = static_cast<std::size_t>(std::llround(static_cast<double>(total) * len / span));
        n = std::max(n, min_per_segment);
        if (n % 2 != 0) ++n;  // Simpson needs an even count
        segs.push_back({breaks[i], breaks[i + 1], n});
    }
    return segs;
}

std::vector<Segment> hull_x_segments(const HullDims& d, std::size_t x_nodes) {
    return split_segments({0.0, d.bow_length, d.loa - d.stern_length, d.loa}, x_nodes, 2);
}

// Composite Simpson over a segmented grid.
template <class F>
double simpson(const std::vector<Segment>& segs, F&& f) {
    double total = 0.0;
    for (const auto& s : segs) {
        const double h = (s.b - s.a) / static_cast<double>(s.intervals);
        double acc = f(s.a) + f(s.b);
        for (std::size_t i = 1; i < s.intervals; ++i) {
            acc += (i % 2 == 1 ? 4.0 : 2.0) * f(s.a + h * static_cast<double>(i));
        }
        total += acc * h / 3.0;
    }
    return total;
}

void require_draft(double f) {
    if (!(f > 0.0 && f <= 1.0)) throw DomainError("draft fraction must lie in (0, 1]");
}

// The slope w'(x) of the waterline, sampled on the segmented x grid and
// interpolated linearly, has Fourier transform
//   X(omega) = sum_k exp(i omega x_k) (G_k / omega^2 - i J_k / omega)
// where J_k is the jump of the interpolant at node k and G_k the jump of its
// derivative (left minus right). Nodes where both vanish drop out, which
// leaves the bow, the stern and the taper junctions.
struct SlopeBreaks {
    std::vector<double> x;
    std::vector<double> jump;
    std::vector<double> kink;
};

SlopeBreaks slope_breaks(const HullDims& d, std::size_t x_nodes) {
    std::vector<double> xs, jump, kink;
    double prev_value = 0.0;  // left limit of the interpolant at the current node
    double prev_slope = 0.0;
    for (const auto& s : hull_x_segments(d, x_nodes)) {
        const double h = (s.b - s.a) / static_cast<double>(s.intervals);
        std::vector<double> f(s.intervals + 1);
        for (std::size_t i = 0; i <= s.intervals; ++i) {
            // Evaluate strictly inside the segment so each piece uses its own
            // linear law at shared breakpoints.
            double x = s.a + h * static_cast<double>(i);
            if (i == 0) x = std::nextafter(s.a, s.b);
            if (i == s.intervals) x = std::nextafter(s.b, s.a);
            f[i] = waterline_slope(x, d);
        }
        for (std::size_t i = 0; i < s.intervals; ++i) {
            const double m = (f[i + 1] - f[i]) / h;
            xs.push_back(s.a + h * static_cast<double>(i));
            jump.push_back(prev_value - f[i]);
            kink.push_back(prev_slope - m);
            prev_value = f[i + 1];
            prev_slope = m;
        }
    }
    xs.push_back(d.loa);
    jump.push_back(prev_value);
    kink.push_back(prev_slope);

    double jmax = 0.0, kmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        jmax = std::max(jmax, std::abs(jump[i]));
        kmax = std::max(kmax, std::abs(kink[i]));
    }
    SlopeBreaks out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(jump[i]) > 1e-9 * jmax || std::abs(kink[i]) > 1e-9 * kmax) {
            out.x.push_back(xs[i]);
            out.jump.push_back(jmax > 0.0 && std::abs(jump[i]) > 1e-9 * jmax ? jump[i] : 0.0);
            out.kink.push_back(kmax > 0.0 && std::abs(kink[i]) > 1e-9 * kmax ? kink[i] : 0.0);
        }
    }
    return out;
}

// int_{-1}^{1} s^n exp(i theta s) ds for n = 0, 1, 2.
std::array<cplx, 3> centred_moments(double theta) {
    std::array<cplx, 3> m{};
    if (std::abs(theta) < 1.0) {
        for (int n = 0; n < 3; ++n) {
            cplx term(1.0, 0.0);
            cplx acc(0.0, 0.0);
            for (int k = 0; k < 24; ++k) {
                if ((n + k) % 2 == 0) acc += term * (2.0 / static_cast<double>(n + k + 1));
                term *= cplx(0.0, theta) / static_cast<double>(k + 1);
            }
            m[static_cast<std::size_t>(n)] = acc;
        }
        return m;
    }
    const double sn = std::sin(theta), cs = std::cos(theta);
    m[0] = 2.0 * sn / theta;
    m[1] = cplx(0.0, 2.0 * (sn - theta * cs) / (theta * theta));
    m[2] = 2.0 * (theta * theta * sn + 2.0 * theta * cs - 2.0 * sn) / (theta * theta * theta);
    return m;
}

// int_0^{u_n} B(u) exp(i phase_scale cosh u) du by composite Filon-Simpson on
// panels of width 2h: the phase is linearised at each panel centre and the
// small residual phase is folded into the quadratically interpolated
// amplitude.
cplx modulated_filon(const std::vector<cplx>& amp, double h, std::size_t stride, double phase_scale) {
    const std::size_t n = amp.size() - 1;
    cplx total(0.0, 0.0);
    const double hs = h * static_cast<double>(stride);
    for (std::size_t j = 0; j + 2 * stride <= n; j += 2 * stride) {
        const double um = hs * static_cast<double>(j / stride + 1);
        const double phi_m = phase_scale * std::cosh(um);
        const double dphi = phase_scale * std::sinh(um);
        auto residual = [&](double u) { return phase_scale * std::cosh(u) - phi_m - dphi * (u - um); };
        const cplx cm = amp[j + stride];
        const cplx cl = amp[j] * std::polar(1.0, residual(um - hs));
        const cplx cr = amp[j + 2 * stride] * std::polar(1.0, residual(um + hs));
        const auto mom = centred_moments(dphi * hs);
        const cplx lin = (cr - cl) * 0.5;
        const cplx quad = (cr - 2.0 * cm + cl) * 0.5;
        total += std::polar(1.0, phi_m) * hs * (cm * mom[0] + lin * mom[1] + quad * mom[2]);
    }
    return total;
}

// Z(kappa) = int_{-depth}^{0} (1 - z^2/D^2) exp(kappa z) dz on a uniform grid,
// exact for the piecewise-linear interpolant of the section factor.
double section_transform(const std::vector<double>& h_nodes, double depth, double kappa) {
    const std::size_t n = h_nodes.size() - 1;
    const double h = depth / static_cast<double>(n);
    double near, far;
    hat_moments(kappa * h, near, far);
    const double step = std::exp(-kappa * h);
    double e_top = 1.0;  // exp(kappa * z_top) for the current interval
    double acc = 0.0;
    // Interval k spans [z_{k+1}, z_k] with z_k = -k h; its right end is z_k.
    for (std::size_t k = 0; k < n; ++k) {
        acc += e_top * (h_nodes[k + 1] * near + h_nodes[k] * far);
        e_top *= step;
        if (e_top == 0.0) break;
    }
    return acc * h;
}

}  // namespace

void HullDims::validate() const {
    const double vals[] = {loa, bow_length, stern_length, deck_beam, deck_depth, stern_beam, waterline};
    for (double v : vals) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InfeasibleHullError("hull dims must be positive and finite");
    }
    if (bow_length + stern_length > loa) throw InfeasibleHullError("L_b + L_s exceeds LOA");
    if (stern_beam > deck_beam / 2.0) throw InfeasibleHullError("B_s exceeds B_d / 2");
    if (waterline > deck_depth) throw InfeasibleHullError("WL exceeds D_d");
}

HullDims scale_params(std::span<const double> p, double loa) {
    if (p.size() != kHullParams) throw ArgumentError("scale_params: expected 6 parameters");
    if (!(loa > 0.0)) throw InfeasibleHullError("scale_params: LOA must be positive");
    for (std::size_t i = 0; i < kHullParams; ++i) {
        if (!(p[i] > 0.0 && p[i] <= 1.0)) {
            throw InfeasibleHullError("scale_params: p" + std::to_string(i + 1) + " outside (0, 1]");
        }
    }
    HullDims d;
    d.loa = loa;
    d.bow_length = p[0] * loa;
    d.stern_length = p[1] * loa;
    d.deck_beam = p[2] * loa;
    d.deck_depth = p[3] * loa;
    d.stern_beam = p[4] * d.deck_beam / 2.0;
    d.waterline = p[5] * d.deck_depth;
    d.validate();
    return d;
}

double waterline_half_breadth(double x, const HullDims& d) {
    const double half = d.deck_beam / 2.0;
    const double stern_start = d.loa - d.stern_length;
    if (x < d.bow_length) {
        const double s = 1.0 - x / d.bow_length;
        return half * (1.0 - s * s);
    }
    if (x > stern_start && d.stern_length > 0.0) {
        const double s = (x - stern_start) / d.stern_length;
        const double end = d.stern_beam / 2.0;
        return end + (half - end) * (1.0 - s * s);
    }
    return half;
}

double waterline_slope(double x, const HullDims& d) {
    const double half = d.deck_beam / 2.0;
    const double stern_start = d.loa - d.stern_length;
    if (x < d.bow_length) return half * 2.0 * (1.0 - x / d.bow_length) / d.bow_length;
    if (x > stern_start && d.stern_length > 0.0) {
        const double s = (x - stern_start) / d.stern_length;
        return -(half - d.stern_beam / 2.0) * 2.0 * s / d.stern_length;
    }
    return 0.0;
}

double section_factor(double z, const HullDims& d) {
    const double r = z / d.deck_depth;
    return 1.0 - r * r;
}

double half_breadth(double x, double z, const HullDims& d) {
    if (!(x >= 0.0 && x <= d.loa)) throw DomainError("half_breadth: x outside [0, LOA]");
    if (!(z <= 0.0 && z >= -d.waterline)) throw DomainError("half_breadth: z outside [-WL, 0]");
    return waterline_half_breadth(x, d) * section_factor(z, d);
}

double wetted_surface_area(const HullDims& d, double draft_fraction, const Quadrature& quad) {
    require_draft(draft_fraction);
    const double depth = draft_fraction * d.waterline;
    const auto xsegs = hull_x_segments(d, quad.x_nodes);
    std::size_t nz = std::max<std::size_t>(2, quad.z_nodes);
    if (nz % 2 != 0) ++nz;
    const std::vector<Segment> zsegs = {{-depth, 0.0, nz}};
    const double inv_d2 = 1.0 / (d.deck_depth * d.deck_depth);
    // Both sides: 2 * int int sqrt(1 + eta_x^2 + eta_z^2) dz dx.
    const double sides = 2.0 * simpson(xsegs, [&](double x) {
        const double w = waterline_half_breadth(x, d);
        const double ws = waterline_slope(x, d);
        return simpson(zsegs, [&](double z) {
            const double h = 1.0 - z * z * inv_d2;
            const double ex = ws * h;
            const double ez = -2.0 * z * inv_d2 * w;
            return std::sqrt(1.0 + ex * ex + ez * ez);
        });
    });
    const double bottom_factor = section_factor(-depth, d);
    const double bottom = 2.0 * simpson(xsegs, [&](double x) { return waterline_half_breadth(x, d) * bottom_factor; });
    const double area = (sides + bottom) / (d.loa * d.loa);
    if (!std::isfinite(area)) throw NumericalError("wetted_surface_area: quadrature produced a non-finite value");
    return area;
}

WaveResistance michell_wave_resistance(const HullDims& d, double speed, double draft_fraction,
                                       const Environment& env, const Quadrature& quad) {
    if (!(speed > 0.0)) throw DomainError("michell_wave_resistance: speed must be positive");
    require_draft(draft_fraction);
    const double depth = draft_fraction * d.waterline;
    const double k0 = env.g / (speed * speed);

    const SlopeBreaks br = slope_breaks(d, quad.x_nodes);
    const std::size_t nz = std::max<std::size_t>(1, quad.z_nodes);
    std::vector<double> h_nodes(nz + 1);
    for (std::size_t k = 0; k <= nz; ++k) {
        h_nodes[k] = section_factor(-depth * static_cast<double>(k) / static_cast<double>(nz), d);
    }

    std::size_t n = std::max<std::size_t>(4, quad.lambda_nodes);
    if (n % 4 != 0) n += 4 - n % 4;  // the half-resolution check also needs an even count
    const double du = quad.u_max / static_cast<double>(n);
    const std::size_t nb = br.x.size();
    struct Pair {
        std::size_t k, l;
        std::vector<cplx> amp;
    };
    std::vector<Pair> pairs;
    for (std::size_t k = 0; k < nb; ++k) {
        for (std::size_t l = k + 1; l < nb; ++l) pairs.push_back({k, l, std::vector<cplx>(n + 1)});
    }
    // |X|^2 = sum_k |c_k|^2 + 2 Re sum_{k<l} c_k conj(c_l) exp(i omega (x_k - x_l)).
    std::vector<double> smooth(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double u = du * static_cast<double>(i);
        const double lambda = std::cosh(u);
        const double omega = lambda * k0;
        const double z_part = section_transform(h_nodes, depth, lambda * lambda * k0);
        const double weight = z_part * z_part * lambda * lambda;
        const double w2 = omega * omega;
        double diag = 0.0;
        for (std::size_t k = 0; k < nb; ++k) {
            const double re = br.kink[k] / w2;
            const double im = -br.jump[k] / omega;
            diag += re * re + im * im;
        }
        smooth[i] = weight * diag;
        for (auto& p : pairs) {
            const cplx ck(br.kink[p.k] / w2, -br.jump[p.k] / omega);
            const cplx cl(br.kink[p.l] / w2, -br.jump[p.l] / omega);
            p.amp[i] = 2.0 * weight * ck * std::conj(cl);
        }
    }
    auto integrate = [&](std::size_t stride) {
        double acc = smooth[0] + smooth[n];
        for (std::size_t i = stride, k = 1; i < n; i += stride, ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * smooth[i];
        double total = acc * du * static_cast<double>(stride) / 3.0;
        for (const auto& p : pairs) total += modulated_filon(p.amp, du, stride, k0 * (br.x[p.k] - br.x[p.l])).real();
        return total;
    };
    const double pref = 4.0 * env.rho * env.g * env.g / (std::numbers::pi * speed * speed);
    const double fine = pref * integrate(1);
    const double coarse = pref * integrate(2);

    WaveResistance res;
    res.value = std::max(0.0, fine);
    res.relative_change = fine > 0.0 ? std::abs(fine - coarse) / fine : 0.0;
    res.converged = res.relative_change <= 0.01;
    if (!std::isfinite(res.value)) throw NumericalError("michell_wave_resistance: non-finite result");
    return res;
}

double wave_resistance_coefficient(double rw, double speed, const HullDims& d, const Environment& env) {
    if (!(speed > 0.0)) throw DomainError("wave_resistance_coefficient: speed must be positive");
    return rw / (0.5 * env.rho * speed * speed * d.loa * d.loa);
}

double friction_coefficient(double reynolds) {
    if (!(reynolds > 100.0)) throw DomainError("friction_coefficient: Reynolds number must exceed 100");
    const double l = std::log10(reynolds) - 2.0;
    return 0.075 / (l * l);
}

double friction_resistance(double cf, double speed, double wetted_area_nondim, const HullDims& d,
                           const Environment& env) {
    return 0.5 * cf * env.rho * speed * speed * wetted_area_nondim * d.loa * d.loa;
}

std::array<double, kFroudeCount> froude_numbers() {
    std::array<double, kFroudeCount> fr{};
    for (std::size_t i = 0; i < kFroudeCount; ++i) {
        fr[i] = kFroudeMin + (kFroudeMax - kFroudeMin) * static_cast<double>(i) / static_cast<double>(kFroudeCount - 1);
    }
    return fr;
}

ResistanceResult aggregate_total_resistance(const HullDims& d, const Environment& env, const Quadrature& quad) {
    ResistanceResult out;
    std::array<double, kDraftFractions.size()> areas{};
    for (std::size_t j = 0; j < kDraftFractions.size(); ++j) areas[j] = wetted_surface_area(d, kDraftFractions[j], quad);
    for (double fr : froude_numbers()) {
        const double speed = fr * std::sqrt(env.g * d.loa);
        for (std::size_t j = 0; j < kDraftFractions.size(); ++j) {
            ResistanceCell c;
            c.froude = fr;
            c.draft_fraction = kDraftFractions[j];
            c.speed = speed;
            c.reynolds = speed * d.loa / env.nu;
            c.wetted_area = areas[j];
            const auto rw = michell_wave_resistance(d, speed, c.draft_fraction, env, quad);
            c.wave = rw.value;
            c.converged = rw.converged;
            c.cw = wave_resistance_coefficient(c.wave, speed, d, env);
            c.cf = friction_coefficient(c.reynolds);
            c.friction = friction_resistance(c.cf, speed, c.wetted_area, d, env);
            c.total = c.wave + c.friction;
            out.total += c.total;
            out.converged = out.converged && c.converged;
            out.cells.push_back(c);
        }
    }
    return out;
}

std::array<double, kHullParams> sample_params(Rng& rng, const ParamBox& box) {
    std::array<double, kHullParams> p{};
    for (std::size_t i = 0; i < kHullParams; ++i) p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
    return p;
}

double param_violation(std::span<const double> p) {
    if (p.size() != kHullParams) throw ArgumentError("param_violation: expected 6 parameters");
    double v = 0.0;
    for (double x : p) {
        if (x > 1.0) v += x - 1.0;
        else if (x <= 0.0) v += -x + 1e-3;
    }
    if (p[0] + p[1] > 1.0) v += p[0] + p[1] - 1.0;
    return v;
}

std::array<double, kHullParams> project_params(std::span<const double> p) {
    if (p.size() != kHullParams) throw ArgumentError("project_params: expected 6 parameters");
    std::array<double, kHullParams> q{};
    for (std::size_t i = 0; i < kHullParams; ++i) q[i] = std::clamp(p[i], 1e-3, 1.0);
    const double s = q[0] + q[1];
    if (s > 1.0) {
        q[0] /= s;
        q[1] /= s;
    }
    return q;
}

}  // namespace rdd::hull
