#include "myo/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace myo {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw InvalidInput("unknown key '" + it.key() + "' in " + where);
  }
}

namespace {

Vec3 vec3_from(const json& a, const std::string& where) {
  require(a.is_array() && a.size() == 3, where + " must be a 3-vector");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

}  // namespace

MusculoskeletalModel morphology_from_json(const json& j) {
  reject_unknown_keys(j, {"links", "joints", "muscles", "end_effectors"}, "morphology");
  MusculoskeletalModel model;
  require(j.contains("links") && j.at("links").is_array(), "morphology needs links[]");
  model.num_links = static_cast<int>(j.at("links").size());

  int jid = 0;
  for (const auto& jj : j.value("joints", json::array())) {
    reject_unknown_keys(jj, {"parent", "child", "axis", "origin", "limits"}, "joint");
    JointDef d;
    d.id = jid++;
    d.parent_link = jj.at("parent").get<int>();
    d.child_link = jj.at("child").get<int>();
    d.axis = vec3_from(jj.at("axis"), "joint axis");
    d.origin = vec3_from(jj.value("origin", json::array({0.0, 0.0, 0.0})), "joint origin");
    auto lim = jj.value("limits", json::array({-3.14, 3.14}));
    require(lim.is_array() && lim.size() == 2, "joint limits must be [min, max]");
    d.limit_min = lim[0].get<double>();
    d.limit_max = lim[1].get<double>();
    model.joints.push_back(d);
  }
  int mid = 0;
  for (const auto& mj : j.value("muscles", json::array())) {
    reject_unknown_keys(mj, {"via_points", "f_min", "f_max", "ldot_min", "ldot_max", "k_n"},
                        "muscle");
    MusclePath m;
    m.id = mid++;
    for (const auto& vj : mj.at("via_points")) {
      reject_unknown_keys(vj, {"link", "offset"}, "via point");
      ViaPoint vp;
      vp.link = vj.at("link").get<int>();
      vp.offset = vec3_from(vj.at("offset"), "via point offset");
      m.via_points.push_back(vp);
    }
    m.f_min = mj.value("f_min", 0.0);
    m.f_max = mj.value("f_max", 200.0);
    m.ldot_min = mj.value("ldot_min", -0.3);
    m.ldot_max = mj.value("ldot_max", 0.3);
    m.k_n = mj.value("k_n", 2.0e4);
    model.muscles.push_back(std::move(m));
  }
  for (const auto& ej : j.value("end_effectors", json::array())) {
    reject_unknown_keys(ej, {"link", "offset"}, "end effector");
    EndEffector ee;
    ee.link = ej.at("link").get<int>();
    ee.offset = vec3_from(ej.at("offset"), "end effector offset");
    model.end_effectors.push_back(ee);
  }
  model.validate();
  return model;
}

MusculoskeletalModel load_morphology(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open morphology file: " + path);
  return morphology_from_json(json::parse(in));
}

json morphology_to_json(const MusculoskeletalModel& model) {
  json j;
  j["links"] = json::array();
  for (int l = 0; l < model.num_links; ++l) j["links"].push_back("link" + std::to_string(l));
  j["joints"] = json::array();
  for (const auto& d : model.joints) {
    j["joints"].push_back({{"parent", d.parent_link},
                           {"child", d.child_link},
                           {"axis", {d.axis[0], d.axis[1], d.axis[2]}},
                           {"origin", {d.origin[0], d.origin[1], d.origin[2]}},
                           {"limits", {d.limit_min, d.limit_max}}});
  }
  j["muscles"] = json::array();
  for (const auto& m : model.muscles) {
    json vps = json::array();
    for (const auto& vp : m.via_points)
      vps.push_back({{"link", vp.link}, {"offset", {vp.offset[0], vp.offset[1], vp.offset[2]}}});
    j["muscles"].push_back({{"via_points", vps},
                            {"f_min", m.f_min},
                            {"f_max", m.f_max},
                            {"ldot_min", m.ldot_min},
                            {"ldot_max", m.ldot_max},
                            {"k_n", m.k_n}});
  }
  j["end_effectors"] = json::array();
  for (const auto& ee : model.end_effectors)
    j["end_effectors"].push_back(
        {{"link", ee.link}, {"offset", {ee.offset[0], ee.offset[1], ee.offset[2]}}});
  return j;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> layout_column_names(const SliceLayout& layout, const std::string& prefix) {
  std::vector<std::string> names;
  for (const auto& s : layout.slices)
    for (int i = 0; i < s.second; ++i) names.push_back(prefix + s.first + "_" + std::to_string(i));
  return names;
}

}  // namespace

void save_dataset(const Dataset& data, const SliceLayout& in_layout, const SliceLayout& out_layout,
                  const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open dataset file for writing: " + path);
  const bool autoenc = in_layout.dim() == out_layout.dim() &&
                       (data.x_in.rows() == data.x_out.rows()) &&
                       data.x_in.isApprox(data.x_out);
  auto in_names = layout_column_names(in_layout, "");
  std::string header;
  for (const auto& n : in_names) header += (header.empty() ? "" : ",") + n;
  if (!autoenc)
    for (const auto& n : layout_column_names(out_layout, "next_")) header += "," + n;
  out << header << "\n";
  for (int r = 0; r < data.size(); ++r) {
    std::string row;
    for (int c = 0; c < data.x_in.cols(); ++c)
      row += (c == 0 ? "" : ",") + format_double(data.x_in(r, c));
    if (!autoenc)
      for (int c = 0; c < data.x_out.cols(); ++c) row += "," + format_double(data.x_out(r, c));
    out << row << "\n";
  }
}

Dataset load_dataset(const std::string& path, const SliceLayout& in_layout,
                     const SliceLayout& out_layout) {
  std::ifstream in(path);
  require(in.good(), "cannot open dataset file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "dataset file is empty: " + path);

  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  auto expect_in = layout_column_names(in_layout, "");
  const bool autoenc = cols.size() == expect_in.size();
  std::vector<std::string> expect = expect_in;
  if (!autoenc)
    for (const auto& n : layout_column_names(out_layout, "next_")) expect.push_back(n);
  require(cols == expect, "dataset header does not match the expected layout in " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    require(row.size() == expect.size(), "dataset row width mismatch in " + path);
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.x_in.resize(static_cast<int>(rows.size()), in_layout.dim());
  data.x_out.resize(static_cast<int>(rows.size()), out_layout.dim());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < in_layout.dim(); ++c) data.x_in(static_cast<int>(r), c) = rows[r][c];
    for (int c = 0; c < out_layout.dim(); ++c)
      data.x_out(static_cast<int>(r), c) = autoenc ? rows[r][c] : rows[r][in_layout.dim() + c];
  }
  return data;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open csv file: " + path);
  CsvTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "csv file is empty: " + path);
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) table.columns.push_back(tok);
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InvalidInput("malformed csv value at " + path + ":" + std::to_string(lineno));
      }
    }
    require(row.size() == table.columns.size(),
            "csv row width mismatch at " + path + ":" + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  table.rows.resize(static_cast<int>(rows.size()), static_cast<int>(table.columns.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      table.rows(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return table;
}

void save_residual_stats(const ResidualStats& stats, const std::string& path) {
  json j;
  j["format"] = "myo-residual-stats";
  j["mean"] = std::vector<double>(stats.mean.data(), stats.mean.data() + stats.mean.size());
  j["std"] = std::vector<double>(stats.std.data(), stats.std.data() + stats.std.size());
  std::ofstream out(path);
  require(out.good(), "cannot open stats file for writing: " + path);
  out << j.dump(2);
}

ResidualStats load_residual_stats(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open stats file: " + path);
  json j = json::parse(in);
  require(j.value("format", "") == "myo-residual-stats", "not a residual stats file");
  auto mean = j.at("mean").get<std::vector<double>>();
  auto stdv = j.at("std").get<std::vector<double>>();
  ResidualStats s;
  s.mean = Eigen::Map<const VecX>(mean.data(), mean.size());
  s.std = Eigen::Map<const VecX>(stdv.data(), stdv.size());
  s.calibrated = true;
  return s;
}

}  // namespace myo
