#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quadric {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct PlotSpec {
  std::string x, y, group;  // group may be empty
  bool log_x = false, log_y = false;
  bool abs_y = false;
  std::string title;
};

/// Sensible defaults for the CSVs the experiments write (by header shape);
/// otherwise the first two columns on linear axes.
PlotSpec default_plot_spec(const CsvTable& t);

/// Standalone SVG: one polyline with markers per group.
std::string render_svg(const CsvTable& t, const PlotSpec& spec);

}  // namespace quadric
