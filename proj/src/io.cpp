#include "logz/io.hpp"

#include <algorithm>
#include <cmath>

namespace logz {

void write_svg_polyline(const std::string& path, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& title) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::runtime_error("write_svg_polyline: need >= 2 matching points");
  const double w = 640, h = 400, pad = 40;
  const double xmin = *std::min_element(xs.begin(), xs.end());
  const double xmax = *std::max_element(xs.begin(), xs.end());
  const double ymin = *std::min_element(ys.begin(), ys.end());
  const double ymax = *std::max_element(ys.begin(), ys.end());
  const double xs_span = std::max(xmax - xmin, 1e-12);
  const double ys_span = std::max(ymax - ymin, 1e-12);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << pad << "' y='20' font-size='14'>" << title << "</text>\n";
  out << "<polyline fill='none' stroke='steelblue' stroke-width='1.2' points='";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double px = pad + (xs[i] - xmin) / xs_span * (w - 2 * pad);
    const double py = h - pad - (ys[i] - ymin) / ys_span * (h - 2 * pad);
    out << px << "," << py << " ";
  }
  out << "'/>\n</svg>\n";
}

}  // namespace logz
