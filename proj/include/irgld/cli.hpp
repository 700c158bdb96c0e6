#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irgld {

inline constexpr const char* kResultSchema = "irgld.result/1";

// Runs one subcommand. Exit codes: 0 success, 2 validation or usage error,
// 3 runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

// Plot data: comment lines ("# ..."), a header row, then numeric rows written
// with 17 significant digits.
struct PlotData {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const PlotData&) const = default;
};

void emit_plot_data(const PlotData& data, const std::string& path);
PlotData read_plot_data(const std::string& path);

}  // namespace irgld
