#pragma once

#include <string>
#include <vector>

namespace myo {

// Minimal deterministic SVG line-plot writer; no plotting dependency.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  void add_series(const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y);
  void add_hline(double y, const std::string& label);

  std::string render(int width = 720, int height = 420) const;
  void write(const std::string& path, int width = 720, int height = 420) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  struct HLine {
    double y;
    std::string label;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<HLine> hlines_;
};

}  // namespace myo
