#pragma once
#include <cmath>

namespace metacost {

// Shared Hill-type curve settings. Per-muscle width and vmax live in
// MuscleParams; these are the model-level defaults and shape constants.
struct HillConfig {
    double width = 0.56;
    double curvature_g = 4.0;  // force-velocity curvature G
    double ecc_plateau = 1.5;  // eccentric force asymptote, > 1
    double vmax_norm = 10.0;
};

// Gaussian force-length curve, peak 1 at optimal length.
inline double f_fl(double lce_norm, double width) {
    const double z = (lce_norm - 1.0) / width;
    return std::exp(-z * z);
}

// Hill force-velocity curve over shortening-positive normalized velocity.
// Concentric side is the classic hyperbola (1 - v/vmax)/(1 + G v/vmax),
// capped at v = vmax. The eccentric side is a rational branch that matches
// the concentric slope at v = 0 and saturates at ecc_plateau.
inline double f_fv(double vce_norm, double curvature_g, double vmax_norm,
                   double ecc_plateau) {
    const double vbar = vce_norm / vmax_norm;
    if (vbar >= 0.0) {
        if (vbar >= 1.0) return 0.0;
        return (1.0 - vbar) / (1.0 + curvature_g * vbar);
    }
    const double u = -vbar; // lengthening speed fraction
    const double d = (ecc_plateau - 1.0) / (1.0 + curvature_g);
    return (d + ecc_plateau * u) / (d + u);
}

} // namespace metacost
