#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rdd/random.hpp"

namespace rdd::hull {

// Principal dimensions of the reduced parametric hull, in metres.
// x runs from the bow (0) to the stern (loa); z is depth, 0 at the design
// waterplane and negative below it.
struct HullDims {
    double loa = 0.0;           // length overall
    double bow_length = 0.0;    // L_b, bow taper
    double stern_length = 0.0;  // L_s, stern taper
    double deck_beam = 0.0;     // B_d
    double deck_depth = 0.0;    // D_d
    double stern_beam = 0.0;    // B_s
    double waterline = 0.0;     // WL, design draft

    // Throws InfeasibleHullError unless all dims are positive, L_b + L_s <= LOA,
    // B_s <= B_d / 2 and WL <= D_d.
    void validate() const;
};

constexpr std::size_t kHullParams = 6;

// L_b = p1 LOA, L_s = p2 LOA, B_d = p3 LOA, D_d = p4 LOA, B_s = p5 B_d/2, WL = p6 D_d.
HullDims scale_params(std::span<const double> p, double loa);

// Waterplane half-breadth: 0 at the bow, quadratic rise to B_d/2 over the bow
// taper, parallel midbody, quadratic fall to B_s/2 at the stern.
double waterline_half_breadth(double x, const HullDims& dims);
// d/dx of waterline_half_breadth; piecewise linear in x.
double waterline_slope(double x, const HullDims& dims);
// Depth attenuation 1 - (z / D_d)^2.
double section_factor(double z, const HullDims& dims);

// eta(x, z) = waterline_half_breadth(x) * section_factor(z) for
// 0 <= x <= LOA, -WL <= z <= 0; DomainError otherwise.
double half_breadth(double x, double z, const HullDims& dims);

struct Environment {
    double rho = 1000.0;   // kg/m^3
    double g = 9.81;       // m/s^2
    double nu = 1.19e-6;   // m^2/s
};

struct Quadrature {
    std::size_t x_nodes = 128;
    std::size_t z_nodes = 32;
    std::size_t lambda_nodes = 256;  // intervals in u, lambda = cosh(u)
    double u_max = 8.0;
};

// Wetted area of the hull submerged to depth draft_fraction * WL (both sides
// plus the flat bottom), divided by LOA^2. Composite Simpson in (x, z).
double wetted_surface_area(const HullDims& dims, double draft_fraction, const Quadrature& quad = {});

struct WaveResistance {
    double value = 0.0;            // R_w in newtons
    double relative_change = 0.0;  // vs. the same rule on every other lambda node
    bool converged = true;         // relative_change <= 1%
};

// Michell thin-ship wave resistance at speed U for the hull submerged to
// draft_fraction * WL.
WaveResistance michell_wave_resistance(const HullDims& dims, double speed, double draft_fraction,
                                       const Environment& env = {}, const Quadrature& quad = {});

// C_w = R_w / (rho U^2 LOA^2 / 2).
double wave_resistance_coefficient(double wave_resistance, double speed, const HullDims& dims,
                                   const Environment& env = {});

// 0.075 / (log10(Re) - 2)^2; DomainError for Re <= 100.
double friction_coefficient(double reynolds);

// R_f = C_f rho U^2 S_At LOA^2 / 2.
double friction_resistance(double cf, double speed, double wetted_area_nondim, const HullDims& dims,
                           const Environment& env = {});

struct ResistanceCell {
    double froude = 0.0;
    double draft_fraction = 0.0;
    double speed = 0.0;
    double reynolds = 0.0;
    double wetted_area = 0.0;  // S_At, nondimensional
    double wave = 0.0;         // R_w
    double friction = 0.0;     // R_f
    double total = 0.0;        // R_T = R_w + R_f
    double cw = 0.0;
    double cf = 0.0;
    bool converged = true;
};

struct ResistanceResult {
    std::vector<ResistanceCell> cells;  // Froude-major, 8 x 4
    double total = 0.0;                 // sum of R_T over the cells, in cell order
    bool converged = true;
};

constexpr std::array<double, 4> kDraftFractions = {0.25, 0.33, 0.5, 0.67};
constexpr std::size_t kFroudeCount = 8;
constexpr double kFroudeMin = 0.1;
constexpr double kFroudeMax = 0.45;

std::array<double, kFroudeCount> froude_numbers();

// Total calm-water resistance over 8 Froude numbers and 4 draft fractions.
ResistanceResult aggregate_total_resistance(const HullDims& dims, const Environment& env = {},
                                            const Quadrature& quad = {});

// Box from which the hull benchmark draws feasible parameter vectors.
struct ParamBox {
    std::array<double, kHullParams> lo = {0.10, 0.10, 0.08, 0.05, 0.30, 0.40};
    std::array<double, kHullParams> hi = {0.40, 0.40, 0.20, 0.12, 1.00, 0.90};
};

std::array<double, kHullParams> sample_params(Rng& rng, const ParamBox& box = {});

// Constraint violation of a raw parameter vector: sum of distances outside
// (0, 1] per component plus the excess of p1 + p2 over 1. Zero iff scale_params
// accepts p.
double param_violation(std::span<const double> p);

// Closest point of the feasible region (componentwise clamp to [1e-3, 1],
// then p1, p2 shrunk proportionally if p1 + p2 > 1).
std::array<double, kHullParams> project_params(std::span<const double> p);

}  // namespace rdd::hull
