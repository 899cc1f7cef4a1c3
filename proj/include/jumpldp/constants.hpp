#ifndef JUMPLDP_CONSTANTS_HPP
#define JUMPLDP_CONSTANTS_HPP

namespace jumpldp {

// Domain membership tolerance for A = {z >= 0, sum z <= 1}.
inline constexpr double kTolA = 1e-12;

// Rates below this are treated as zero (absorption, support checks).
inline constexpr double kTolRate = 1e-12;

// Simplex lattice resolution (points per edge) for grid bounds.
inline constexpr int kGridResolution = 200;

// Reference population used by the boundary-consistency check.
inline constexpr int kNRefBoundary = 1000;

// Maximum total degree accepted for rate polynomials.
inline constexpr int kMaxPolyDegree = 6;

// Dual Newton ascent (local Lagrangian).
inline constexpr double kNewtonGradTol = 1e-10;
inline constexpr int kNewtonMaxIter = 200;
inline constexpr double kThetaDivergence = 1e3;
inline constexpr double kTikhonov = 1e-12;
inline constexpr double kFeasibilityResidual = 1e-7;

// Quadrature defaults.
inline constexpr int kQuadOrder = 8;
inline constexpr double kSimpsonTol = 1e-10;

// Equilibrium Newton.
inline constexpr double kEquilibriumTol = 1e-12;
inline constexpr int kEquilibriumMaxIter = 100;

// Path-space minimizer.
inline constexpr double kOptimizerDecreaseTol = 1e-9;
inline constexpr int kOptimizerStallWindow = 10;
inline constexpr int kOptimizerMaxIter = 10000;
inline constexpr double kARegularize = 1e-6;   // interior shrink factor for drifting nodes
inline constexpr double kAEndpoint = 0.01;     // endpoint regularization for boundary targets
inline constexpr int kDefaultSegments = 100;

// Default geometric horizon grid for the quasipotential search.
inline constexpr double kTGridMin = 1.0;
inline constexpr double kTGridMax = 200.0;
inline constexpr int kTGridPoints = 12;

// Identifier of the counter-based generator, recorded in outputs.
inline constexpr const char* kRngName = "splitmix64-counter";

}  // namespace jumpldp

#endif
