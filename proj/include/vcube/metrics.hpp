#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vcube/geometry.hpp"
#include "vcube/image.hpp"

namespace vcube {

// Aggregate quality numbers for one rendered frame (or a sequence average).
// All error metrics are >= 0; PSNR is +infinity when the images are identical
// and that sentinel is serialized as the string "inf".
struct MetricReport {
    double psnr_full_db = 0.0;        // whole frame
    double psnr_foreground_db = 0.0;  // alpha > 0 region only
    double alpha_mse = 0.0;           // raw MSE; tables often quote it x1e3
    double depth_rmse_m = 0.0;        // foreground depth error, meters
    double photometric = 0.0;         // mean |target - warped| per channel, gray levels
    double smoothness = 0.0;          // sum |Laplacian| over interior pixels
    double gaze_error_px = std::numeric_limits<double>::quiet_NaN();
    int first_frame = 0, last_frame = 0;

    std::string to_json() const;
};

inline constexpr const char* kMetricsCsvHeader =
    "frame,psnr_full_db,psnr_fg_db,alpha_mse,depth_rmse_m,photometric,smoothness";
std::string metrics_csv_row(int frame, const MetricReport& r);

// Peak signal-to-noise ratio on the 8-bit scale: 10*log10(255^2 / MSE), the
// squared error averaged over every channel of every counted pixel. A null
// mask counts all pixels; otherwise the 1-channel mask selects pixels where it
// is nonzero. Identical inputs return +infinity.
double psnr(const ImageU8& a, const ImageU8& b, const ImageU8* mask = nullptr);

// Mean squared difference between two alpha mattes in [0,1], all pixels.
double alpha_mse(const ImageF& a, const ImageF& b);

// Mean absolute color difference, per channel, between a target image and a
// set of views warped into its frame, counting only pixels each view's mask
// marks visible. Empty mask list means fully visible. Returns 0 when nothing
// is visible.
double photometric_discrepancy(const ImageU8& target, const std::vector<ImageU8>& views,
                               const std::vector<ImageU8>& masks = {});

// Total variation of the discrete 5-point Laplacian: sum over interior pixels
// of |4*D(x,y) - D(x-1,y) - D(x+1,y) - D(x,y-1) - D(x,y+1)|. Affine ramps and
// constants score exactly zero.
double smoothness_energy(const ImageF& depth);

// Root-mean-square depth error in meters over pixels where both maps are
// valid (> 0) and, when given, the 1-channel mask is nonzero.
double depth_rmse(const ImageF& depth, const ImageF& truth, const ImageU8* mask = nullptr);

// Locates the red eye marker in a composited screen (red-dominant pixels,
// weighted centroid) and returns its pixel distance from the analytically
// expected position. Throws MarkerNotVisible when no marker pixel is found.
double gaze_pixel_error(const ImageU8& screen, const Vector2d& expected_px);

}  // namespace vcube
