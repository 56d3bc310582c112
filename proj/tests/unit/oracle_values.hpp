#pragma once

// Frozen reference values from tests/oracles/oracles.py (mpmath, scipy).

namespace oracle {

struct DensityPoint {
  double alpha;
  int dim;
  double r;
  double value;
};

inline constexpr DensityPoint kDensity[] = {
    {1.5, 1, 0.0, 0.28735275145216445},   {1.5, 1, 0.5, 0.26229684036390461},
    {1.5, 1, 3.0, 0.031509423616436235},  {0.7, 1, 2.0, 0.050141042713155956},
    {1.5, 2, 0.0, 0.094748068897354901},  {1.5, 2, 1.0, 0.063184557589447795},
    {0.7, 2, 1.0, 0.04128390616392309},   {1.5, 3, 2.0, 0.0067031840982486271},
    {0.7, 3, 0.5, 0.10214060257758771},
};

// P(Z_d > -1): one step from e_d stays in the half-space
inline constexpr double kOneStepSurvival15 = 0.75634202440100545;
inline constexpr double kOneStepSurvival07 = 0.73995088382224208;

struct HalflinePoint {
  double alpha, x, y, value;
};
inline constexpr HalflinePoint kHalfline[] = {
    {1.5, 1.0, 2.0, 0.8177397323391911},
    {0.7, 1.0, 3.0, 0.26151347179331094},
    {1.5, 0.3, 5.0, 0.24281788619769915},
};

inline constexpr double kGreen2d = 0.14178695839219314;   // alpha 1.5, (0,1), (0.5,2)
inline constexpr double kGreen3d = 0.012778079453183714;  // alpha 0.7, (0,0,1), (1,-1,0.5)

// P(|Z(tau)| <= 1.5) for Z from the centre of the unit ball
inline constexpr double kBallCdf07 = 0.35958356301789018;
inline constexpr double kBallCdf15 = 0.80492496862587259;

inline constexpr double kKolmogorovQ1 = 0.26999967167735456;
inline constexpr double kKolmogorovQ136 = 0.049485876755377876;
inline constexpr double kChi2Sf_384_1 = 0.05004352124870519;
inline constexpr double kChi2Sf_10_4 = 0.04042768199451279;
inline constexpr double kWilson30of100Lo = 0.21894885294932758;
inline constexpr double kWilson30of100Hi = 0.39584854633346662;

}  // namespace oracle
