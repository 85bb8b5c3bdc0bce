#include "twostep/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace twostep {

using json = nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kFloatDigits, v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) { row(header); }

void CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw PreconditionViolation("CsvTable: row has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void CsvTable::save(const std::filesystem::path& path) const { write_text(path, text_); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Mat json_mat(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw Error(std::string("gain file: '") + what + "' is not a matrix");
  }
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw Error(std::string("gain file: ragged '") + what + "'");
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string serialize_gain(const GainFile& gain) {
  json root;
  root["K"] = mat_json(gain.k);
  root["K0"] = mat_json(gain.k0);
  root["P"] = mat_json(gain.p);
  if (gain.k_star) root["K_star"] = mat_json(*gain.k_star);
  if (gain.p_star) root["P_star"] = mat_json(*gain.p_star);
  root["iterations"] = gain.iterations;
  root["converged"] = gain.converged;
  root["P_history_norms"] = gain.p_history_norms;
  root["P_change_norms"] = gain.p_change_norms;
  return root.dump(2) + "\n";
}

GainFile parse_gain(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("gain file: ") + e.what());
  }
  if (!root.contains("K") || !root.contains("K0") || !root.contains("P")) {
    throw Error("gain file: missing one of K, K0, P");
  }
  GainFile g;
  g.k = json_mat(root["K"], "K");
  g.k0 = json_mat(root["K0"], "K0");
  g.p = json_mat(root["P"], "P");
  if (root.contains("K_star")) g.k_star = json_mat(root["K_star"], "K_star");
  if (root.contains("P_star")) g.p_star = json_mat(root["P_star"], "P_star");
  g.iterations = root.value("iterations", 0);
  g.converged = root.value("converged", false);
  g.p_history_norms = root.value("P_history_norms", std::vector<double>{});
  g.p_change_norms = root.value("P_change_norms", std::vector<double>{});
  return g;
}

void write_cost_curve(const std::filesystem::path& path, const std::vector<EpisodeResult>& curve) {
  CsvTable table({"episode", "cost", "steps", "penalized"});
  for (std::size_t e = 0; e < curve.size(); ++e) {
    table.row({std::to_string(e), format_double(curve[e].cost), std::to_string(curve[e].steps),
               curve[e].penalized ? "1" : "0"});
  }
  table.save(path);
}

std::string serialize_weights(const Vec& theta, const Mat& w) {
  json root;
  root["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  root["W"] = mat_json(w);
  return root.dump(2) + "\n";
}

void parse_weights(const std::string& text, Vec& theta, Mat& w) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("weights file: ") + e.what());
  }
  if (!root.contains("theta") || !root.contains("W")) {
    throw Error("weights file: missing theta or W");
  }
  const auto t = root["theta"].get<std::vector<double>>();
  theta = Eigen::Map<const Vec>(t.data(), static_cast<Eigen::Index>(t.size()));
  w = json_mat(root["W"], "W");
}

}  // namespace twostep
