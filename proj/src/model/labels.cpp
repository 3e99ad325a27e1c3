#include "model/labels.hpp"

#include <algorithm>
#include <array>

namespace thg::model {
namespace {

constexpr std::array<std::string_view, 50> kFineLabels = {
    "ABBR:abb",      "ABBR:exp",

    "DESC:def",      "DESC:desc",     "DESC:manner",   "DESC:reason",

    "ENTY:animal",   "ENTY:body",     "ENTY:color",    "ENTY:cremat",
    "ENTY:currency", "ENTY:dismed",   "ENTY:event",    "ENTY:food",
    "ENTY:instru",   "ENTY:lang",     "ENTY:letter",   "ENTY:other",
    "ENTY:plant",    "ENTY:product",  "ENTY:religion", "ENTY:sport",
    "ENTY:substance", "ENTY:symbol",  "ENTY:techmeth", "ENTY:termeq",
    "ENTY:veh",      "ENTY:word",

    "HUM:desc",      "HUM:gr",        "HUM:ind",       "HUM:title",

    "LOC:city",      "LOC:country",   "LOC:mount",     "LOC:other",
    "LOC:state",

    "NUM:code",      "NUM:count",     "NUM:date",      "NUM:dist",
    "NUM:money",     "NUM:ord",       "NUM:other",     "NUM:perc",
    "NUM:period",    "NUM:speed",     "NUM:temp",      "NUM:volsize",
    "NUM:weight",
};

}  // namespace

std::span<const std::string_view> fine_grained_labels() { return kFineLabels; }

bool is_fine_grained_label(std::string_view label) {
  return std::find(kFineLabels.begin(), kFineLabels.end(), label) != kFineLabels.end();
}

std::optional<MajorType> parent_major(std::string_view fine_label) {
  if (!is_fine_grained_label(fine_label)) return std::nullopt;
  const auto coarse = fine_label.substr(0, fine_label.find(':'));
  if (coarse == "HUM") return MajorType::Human;
  if (coarse == "ENTY") return MajorType::Entity;
  if (coarse == "LOC") return MajorType::Location;
  if (coarse == "DESC") return MajorType::Description;
  return MajorType::Other;  // ABBR, NUM
}

}  // namespace thg::model
