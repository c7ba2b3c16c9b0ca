#pragma once

// Numerical tolerances shared by every check in the lab. Structural identities
// are exact algebra evaluated in double precision; iterative results come out
// of eigen solves or finite differences.
namespace ebmlab::tol {

inline constexpr double kStructural = 1e-12;
inline constexpr double kIterative = 1e-10;
inline constexpr double kPotential = 1e-9;
inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kReconstruction = 1e-8;
inline constexpr double kFiniteDifference = 1e-6;
inline constexpr double kCrossSolver = 1e-6;

inline constexpr double kPivot = 1e-12;
inline constexpr double kDegenerateGap = 1e-12;
inline constexpr double kJacobiOffDiagonal = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

// Halving delta must shrink the entropy-rule approximation error by at least
// this factor (1/4 asymptotically).
inline constexpr double kHalvingRatio = 0.35;

// Entropy-accuracy trace: calibrated offline on high-accuracy families
// (tests/oracle/calibrate_rlvr.py, worst observed correlation -0.71).
inline constexpr double kTraceCorrelation = -0.5;
inline constexpr double kTracePremiseAccuracy = 0.99;

}  // namespace ebmlab::tol
