#include "crowdloc/eval/density.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "crowdloc/common/error.hpp"

namespace crowdloc::eval {

std::string DensityBucket::range() const {
  if (!max_count) return std::to_string(min_count - 1) + "+";
  return std::to_string(min_count) + "-" + std::to_string(*max_count);
}

const std::array<DensityBucket, 6>& density_buckets() {
  static const std::array<DensityBucket, 6> buckets{{
      {"extremely sparse", 1, 5},
      {"sparse", 6, 20},
      {"moderate", 21, 45},
      {"relatively high", 46, 100},
      {"high", 101, 800},
      {"extremely dense", 801, std::nullopt},
  }};
  return buckets;
}

std::size_t bucket_index(int ref_count) {
  check(ref_count >= 1, ErrorKind::invalid_argument, "density buckets need at least one reference");
  const auto& b = density_buckets();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!b[i].max_count || ref_count <= *b[i].max_count) return i;
  }
  return b.size() - 1;
}

DensityBucketTable density_bucket_report(const std::vector<ImageResult>& images) {
  DensityBucketTable table;
  for (const auto& b : density_buckets()) table.rows.push_back({b, 0, {}, {}});
  for (const auto& img : images) {
    BucketRow& row = table.rows[bucket_index(img.ref_count)];
    ++row.n_images;
    row.counts += img.report.counts;
  }
  for (auto& row : table.rows) row.metrics = metrics(row.counts);
  return table;
}

std::string density_plot_svg(const DensityBucketTable& table) {
  constexpr double width = 720, height = 420;
  constexpr double left = 70, right = 70, top = 40, bottom = 70;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const std::size_t n = table.rows.size();
  const double slot = plot_w / double(std::max<std::size_t>(n, 1));
  int max_images = 1;
  for (const auto& r : table.rows) max_images = std::max(max_images, r.n_images);

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // image-count bars (right axis)
  for (std::size_t i = 0; i < n; ++i) {
    const double bar_h = plot_h * double(table.rows[i].n_images) / double(max_images);
    svg << "<rect x=\"" << left + slot * i + slot * 0.2 << "\" y=\"" << top + plot_h - bar_h << "\" width=\""
        << slot * 0.6 << "\" height=\"" << bar_h << "\" fill=\"#d0d0d0\"/>\n";
    svg << "<text x=\"" << left + slot * (i + 0.5) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << table.rows[i].bucket.range() << "</text>\n";
  }
  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left + plot_w << "\" y1=\"" << top << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = top + plot_h * (1.0 - t / 4.0);
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << t * 25
        << "</text>\n";
    svg << "<text x=\"" << left + plot_w + 8 << "\" y=\"" << y + 4 << "\">"
        << static_cast<int>(max_images * t / 4.0 + 0.5) << "</text>\n";
  }
  svg << "<text x=\"" << 18 << "\" y=\"" << top + plot_h / 2
      << "\" transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\" text-anchor=\"middle\">Metric (%)</text>\n";
  svg << "<text x=\"" << width - 14 << "\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(90 "
      << width - 14 << " " << top + plot_h / 2 << ")\" text-anchor=\"middle\">Number of images</text>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\">Reference count per image</text>\n";

  struct Series {
    const char* name;
    const char* color;
    double Metrics::*field;
  };
  const Series series[] = {{"Precision", "#1f77b4", &Metrics::precision},
                           {"Recall", "#2ca02c", &Metrics::recall},
                           {"F1-score", "#d62728", &Metrics::f1}};
  int legend = 0;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      const double v = table.rows[i].metrics.*s.field;
      svg << left + slot * (i + 0.5) << "," << top + plot_h * (1.0 - v) << " ";
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double v = table.rows[i].metrics.*s.field;
      svg << "<circle cx=\"" << left + slot * (i + 0.5) << "\" cy=\"" << top + plot_h * (1.0 - v)
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    svg << "<text x=\"" << left + 10 + legend * 110 << "\" y=\"" << top - 14 << "\" fill=\"" << s.color
        << "\">" << s.name << "</text>\n";
    ++legend;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace crowdloc::eval
