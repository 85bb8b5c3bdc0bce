#pragma once

// Output files shared by the CLI and the plotting scripts. Floats are always
// written with 17 significant digits so results round-trip exactly.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twostep/actor_critic.hpp"
#include "twostep/lqr_offline.hpp"

namespace twostep {

inline constexpr int kFloatDigits = 17;

std::string format_double(double v);

/// Buffered CSV table; nothing touches the filesystem until save().
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct GainFile {
  GainMatrix k;
  GainMatrix k0;
  std::optional<GainMatrix> k_star;
  Mat p;
  std::optional<Mat> p_star;
  int iterations = 0;
  bool converged = false;
  std::vector<double> p_history_norms;   // ||P_i||_F
  std::vector<double> p_change_norms;    // ||P_i - P_{i-1}||_F, i >= 1
};

std::string serialize_gain(const GainFile& gain);
GainFile parse_gain(const std::string& text);

/// costs.csv: episode,cost,steps,penalized
void write_cost_curve(const std::filesystem::path& path, const std::vector<EpisodeResult>& curve);

std::string serialize_weights(const Vec& theta, const Mat& w);
void parse_weights(const std::string& text, Vec& theta, Mat& w);

}  // namespace twostep
