#include "vcube/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vcube/error.hpp"

namespace vcube {

namespace {

void require_same(int aw, int ah, int ac, int bw, int bh, int bc, const char* what) {
    if (aw != bw || ah != bh || ac != bc)
        throw DimensionMismatch(std::string(what) + ": shapes differ");
}

// JSON has no infinity; report the sentinel as a string instead.
nlohmann::json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

double psnr(const ImageU8& a, const ImageU8& b, const ImageU8* mask) {
    require_same(a.width(), a.height(), a.channels(), b.width(), b.height(), b.channels(),
                 "psnr");
    if (mask) {
        require_same(mask->width(), mask->height(), 1, a.width(), a.height(), 1, "psnr mask");
    }
    double sum = 0.0;
    long counted = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            if (mask && mask->at(x, y) == 0) continue;
            ++counted;
            for (int c = 0; c < a.channels(); ++c) {
                double d = double(a.at(x, y, c)) - double(b.at(x, y, c));
                sum += d * d;
            }
        }
    if (counted == 0) throw EmptyMask("psnr: mask selects no pixels");
    double mse = sum / (double(counted) * a.channels());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double alpha_mse(const ImageF& a, const ImageF& b) {
    require_same(a.width(), a.height(), a.channels(), b.width(), b.height(), b.channels(),
                 "alpha_mse");
    if (a.empty()) throw DimensionMismatch("alpha_mse: empty input");
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = double(a.pixels()[i]) - double(b.pixels()[i]);
        sum += d * d;
    }
    return sum / double(a.size());
}

double photometric_discrepancy(const ImageU8& target, const std::vector<ImageU8>& views,
                               const std::vector<ImageU8>& masks) {
    if (!masks.empty() && masks.size() != views.size())
        throw DimensionMismatch("photometric_discrepancy: one mask per view");
    double sum = 0.0;
    long counted = 0;
    for (size_t i = 0; i < views.size(); ++i) {
        const ImageU8& v = views[i];
        require_same(v.width(), v.height(), v.channels(), target.width(), target.height(),
                     target.channels(), "photometric_discrepancy");
        const ImageU8* m = masks.empty() ? nullptr : &masks[i];
        if (m)
            require_same(m->width(), m->height(), 1, target.width(), target.height(), 1,
                         "photometric_discrepancy mask");
        for (int y = 0; y < target.height(); ++y)
            for (int x = 0; x < target.width(); ++x) {
                if (m && m->at(x, y) == 0) continue;
                ++counted;
                for (int c = 0; c < target.channels(); ++c)
                    sum += std::abs(double(target.at(x, y, c)) - double(v.at(x, y, c)));
            }
    }
    if (counted == 0) return 0.0;
    return sum / (double(counted) * target.channels());
}

double smoothness_energy(const ImageF& depth) {
    if (depth.channels() != 1)
        throw DimensionMismatch("smoothness_energy: expects a 1-channel map");
    double sum = 0.0;
    for (int y = 1; y + 1 < depth.height(); ++y)
        for (int x = 1; x + 1 < depth.width(); ++x) {
            double lap = 4.0 * depth.at(x, y) - depth.at(x - 1, y) - depth.at(x + 1, y) -
                         depth.at(x, y - 1) - depth.at(x, y + 1);
            sum += std::abs(lap);
        }
    return sum;
}

double depth_rmse(const ImageF& depth, const ImageF& truth, const ImageU8* mask) {
    require_same(depth.width(), depth.height(), 1, truth.width(), truth.height(), 1,
                 "depth_rmse");
    if (mask)
        require_same(mask->width(), mask->height(), 1, depth.width(), depth.height(), 1,
                     "depth_rmse mask");
    double sum = 0.0;
    long counted = 0;
    for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x) {
            if (mask && mask->at(x, y) == 0) continue;
            double d = depth.at(x, y), t = truth.at(x, y);
            if (d <= 0.0f || t <= 0.0f) continue;
            sum += (d - t) * (d - t);
            ++counted;
        }
    if (counted == 0) throw EmptyDepth("depth_rmse: no jointly valid pixels");
    return std::sqrt(sum / double(counted));
}

double gaze_pixel_error(const ImageU8& screen, const Vector2d& expected_px) {
    if (screen.channels() < 3)
        throw DimensionMismatch("gaze_pixel_error: expects a color screen");
    double cx = 0.0, cy = 0.0, mass = 0.0;
    for (int y = 0; y < screen.height(); ++y)
        for (int x = 0; x < screen.width(); ++x) {
            int r = screen.at(x, y, 0), g = screen.at(x, y, 1), b = screen.at(x, y, 2);
            if (r < 128 || r < g + 64 || r < b + 64) continue;
            double w = r - std::max(g, b);
            cx += w * (x + 0.5);
            cy += w * (y + 0.5);
            mass += w;
        }
    if (mass <= 0.0) throw MarkerNotVisible("gaze_pixel_error: no red marker on screen");
    return (Vector2d(cx / mass, cy / mass) - expected_px).norm();
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["psnr_full_db"] = json_number(psnr_full_db);
    j["psnr_foreground_db"] = json_number(psnr_foreground_db);
    j["alpha_mse"] = json_number(alpha_mse);
    j["depth_rmse_m"] = json_number(depth_rmse_m);
    j["photometric"] = json_number(photometric);
    j["smoothness"] = json_number(smoothness);
    j["gaze_error_px"] = json_number(gaze_error_px);
    j["first_frame"] = first_frame;
    j["last_frame"] = last_frame;
    return j.dump(2);
}

std::string metrics_csv_row(int frame, const MetricReport& r) {
    std::ostringstream os;
    os.precision(9);
    os << frame << ',' << r.psnr_full_db << ',' << r.psnr_foreground_db << ',' << r.alpha_mse
       << ',' << r.depth_rmse_m << ',' << r.photometric << ',' << r.smoothness;
    return os.str();
}

}  // namespace vcube
