#include "crowdloc/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "crowdloc/common/json_io.hpp"

namespace crowdloc::data {

std::string to_string(Background background) {
  switch (background) {
    case Background::flat: return "flat";
    case Background::gradient: return "gradient";
    case Background::clutter: return "clutter";
  }
  return "flat";
}

Background parse_background(const std::string& text) {
  if (text == "flat") return Background::flat;
  if (text == "gradient") return Background::gradient;
  if (text == "clutter") return Background::clutter;
  fail(ErrorKind::config, "unknown background '" + text + "' (expected flat|gradient|clutter)");
}

AnnotatedPatch synth_scene(const SynthConfig& cfg, const std::string& id) {
  check(cfg.height >= 1 && cfg.width >= 1, ErrorKind::invalid_argument, "synth: size must be positive");
  check(cfg.blob_size >= 1 && cfg.blob_size % 2 == 1, ErrorKind::invalid_argument, "synth: blob_size must be odd");
  check(cfg.min_points >= 1 && cfg.max_points >= cfg.min_points, ErrorKind::invalid_argument,
        "synth: need 1 <= min_points <= max_points");
  check(cfg.min_contrast > 0.0 && cfg.max_contrast >= cfg.min_contrast, ErrorKind::invalid_argument,
        "synth: contrast range must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = std::uniform_int_distribution<int>(cfg.min_points, cfg.max_points)(rng);
  const int margin = cfg.blob_size / 2;
  const int rows = cfg.height - 2 * margin;
  const int cols = cfg.width - 2 * margin;
  const double spacing = std::max(cfg.min_spacing, 1.0);
  if (rows <= 0 || cols <= 0 || double(n) * spacing * spacing > 4.0 * rows * cols) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "synth: %d points with spacing %.1f do not fit in %dx%d", n, spacing, cfg.height,
                  cfg.width);
    fail(ErrorKind::invalid_argument, msg);
  }

  std::vector<targets::Point> centers;
  std::uniform_int_distribution<int> pick_r(margin, cfg.height - 1 - margin);
  std::uniform_int_distribution<int> pick_c(margin, cfg.width - 1 - margin);
  const int max_attempts = 1000 * n;
  for (int attempt = 0; attempt < max_attempts && int(centers.size()) < n; ++attempt) {
    const targets::Point p{double(pick_r(rng)), double(pick_c(rng))};
    const bool clear = std::none_of(centers.begin(), centers.end(), [&](const targets::Point& q) {
      return std::hypot(p.row - q.row, p.col - q.col) < spacing;
    });
    if (clear) centers.push_back(p);
  }
  check(int(centers.size()) == n, ErrorKind::invalid_argument,
        "synth: could not place " + std::to_string(n) + " non-overlapping blobs (infeasible configuration)");

  Image image(3, cfg.height, cfg.width);
  // per-channel tint keeps the scene colour-ish without changing contrast semantics
  const double tint[3] = {1.0, 0.95, 0.9};
  std::vector<double> base(std::size_t(cfg.height) * cfg.width, cfg.background_level);
  if (cfg.background == Background::gradient) {
    const double a = unit(rng) * 2.0 * M_PI;
    for (int r = 0; r < cfg.height; ++r) {
      for (int q = 0; q < cfg.width; ++q) {
        const double t = (std::cos(a) * r / cfg.height + std::sin(a) * q / cfg.width) * 0.5;
        base[std::size_t(r) * cfg.width + q] = std::clamp(cfg.background_level + 0.3 * t, 0.0, 1.0);
      }
    }
  } else if (cfg.background == Background::clutter) {
    // blocky low-frequency texture
    const int cell = 8;
    const int gh = (cfg.height + cell - 1) / cell;
    const int gw = (cfg.width + cell - 1) / cell;
    std::vector<double> coarse(std::size_t(gh) * gw);
    for (auto& v : coarse) v = (unit(rng) - 0.5) * 0.15;
    for (int r = 0; r < cfg.height; ++r) {
      for (int q = 0; q < cfg.width; ++q) {
        base[std::size_t(r) * cfg.width + q] =
            std::clamp(cfg.background_level + coarse[std::size_t(r / cell) * gw + q / cell], 0.0, 1.0);
      }
    }
  }
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < cfg.height; ++r) {
      for (int q = 0; q < cfg.width; ++q) image.at(c, r, q) = float(base[std::size_t(r) * cfg.width + q] * tint[c]);
    }
  }

  // point-like confusers: single pixels and short lines, kept off blob footprints
  const double clutter = cfg.background == Background::clutter && cfg.clutter_density <= 0.0 ? 0.002
                                                                                             : cfg.clutter_density;
  const int n_clutter = static_cast<int>(std::lround(clutter * cfg.height * cfg.width));
  std::uniform_int_distribution<int> any_r(0, cfg.height - 1);
  std::uniform_int_distribution<int> any_c(0, cfg.width - 1);
  for (int k = 0; k < n_clutter; ++k) {
    const int r = any_r(rng);
    const int q = any_c(rng);
    const bool line = unit(rng) < 0.5;
    const bool horizontal = unit(rng) < 0.5;
    const double amp = cfg.min_contrast * (0.5 + 0.5 * unit(rng));
    const int len = line ? 4 : 1;
    for (int i = 0; i < len; ++i) {
      const int rr = horizontal ? r : r + i;
      const int qq = horizontal ? q + i : q;
      if (rr >= cfg.height || qq >= cfg.width) continue;
      const bool near_blob = std::any_of(centers.begin(), centers.end(), [&](const targets::Point& p) {
        return std::abs(p.row - rr) <= margin + 1 && std::abs(p.col - qq) <= margin + 1;
      });
      if (near_blob) continue;
      for (int c = 0; c < 3; ++c) image.at(c, rr, qq) = std::min(1.0f, image.at(c, rr, qq) + float(amp * tint[2 - c]));
    }
  }

  std::uniform_real_distribution<double> contrast(cfg.min_contrast, cfg.max_contrast);
  for (const auto& p : centers) {
    const double k = contrast(rng);
    for (int dr = -margin; dr <= margin; ++dr) {
      for (int dc = -margin; dc <= margin; ++dc) {
        const int r = int(p.row) + dr;
        const int q = int(p.col) + dc;
        for (int c = 0; c < 3; ++c) {
          image.at(c, r, q) = float(base[std::size_t(r) * cfg.width + q] * tint[c] + k);
        }
      }
    }
  }

  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (auto& v : image.values()) v = float(double(v) + noise(rng));
  }
  for (auto& v : image.values()) v = std::clamp(v, 0.0f, 1.0f);

  return {std::move(image), targets::PointSet(cfg.height, cfg.width, std::move(centers)), id};
}

std::vector<AnnotatedPatch> synth_dataset(const SynthConfig& config, int count, const std::string& prefix) {
  std::vector<AnnotatedPatch> out;
  out.reserve(std::size_t(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04d", i);
    const std::string id = prefix + buf;
    SynthConfig c = config;
    c.seed = derive_seed(config.seed, id);
    out.push_back(synth_scene(c, id));
  }
  return out;
}

}  // namespace crowdloc::data
