#pragma once

#include "myo/adaptation.hpp"
#include "myo/morphology.hpp"
#include "myo/schema.hpp"
#include "myo/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace myo {

// Morphology JSON: links[], joints[], muscles[], end_effectors[]. Unknown
// keys are rejected. Units: meters, radians, newtons.
MusculoskeletalModel morphology_from_json(const nlohmann::json& j);
MusculoskeletalModel load_morphology(const std::string& path);
nlohmann::json morphology_to_json(const MusculoskeletalModel& model);

// Dataset CSV, one sample per row, header names match the layout slices
// (theta_0.., f_0.., l_0..; dynamic targets get a next_ prefix).
void save_dataset(const Dataset& data, const SliceLayout& in_layout, const SliceLayout& out_layout,
                  const std::string& path);
Dataset load_dataset(const std::string& path, const SliceLayout& in_layout,
                     const SliceLayout& out_layout);

void save_residual_stats(const ResidualStats& stats, const std::string& path);
ResidualStats load_residual_stats(const std::string& path);

// Generic numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  MatX rows;

  int column(const std::string& name) const;  // -1 if absent
};
CsvTable load_csv(const std::string& path);

// Fails on unknown keys anywhere below `where`.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace myo
