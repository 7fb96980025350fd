#include <fstream>

#include "isarf/error.hpp"
#include "isarf/feature_table.hpp"
#include "isarf/svol.hpp"
#include "isarf/synth.hpp"
#include "isarf/util.hpp"

namespace isarf {

std::vector<CohortEntry> read_cohort_manifest(const std::filesystem::path& cohort_dir) {
  const auto path = cohort_dir / "manifest.csv";
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cohort manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "subject_id,label,files,size_target") throw DataError(path.string() + ": unexpected manifest header");

  std::vector<CohortEntry> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 4) throw DataError(where + ": expected 4 columns");
    CohortEntry e;
    e.id = cells[0];
    if (e.id.empty()) throw DataError(where + ": empty subject id");
    e.label = parse_label(cells[1]);
    std::size_t start = 0;
    for (int f = 0; f < 3; ++f) {
      const std::size_t end = cells[2].find(';', start);
      if ((f < 2) == (end == std::string::npos)) throw DataError(where + ": files must list exactly three paths");
      e.files[static_cast<std::size_t>(f)] = cells[2].substr(start, end == std::string::npos ? end : end - start);
      start = end + 1;
    }
    if (!cells[3].empty()) e.size_target = parse_double(cells[3]);
    entries.push_back(std::move(e));
  }
  return entries;
}

SubjectRecord load_subject(const std::filesystem::path& cohort_dir, const CohortEntry& entry) {
  const auto load = [&](std::size_t f) {
    const auto path = cohort_dir / entry.files[f];
    if (!std::filesystem::exists(path)) {
      throw DataError("subject " + entry.id + ": missing file " + path.string());
    }
    try {
      return read_svol(path);
    } catch (const DataError& e) {
      throw DataError("subject " + entry.id + ": " + e.what());
    }
  };
  SubjectRecord r;
  r.id = entry.id;
  r.label = entry.label;
  r.intensity = volume_cast<std::int16_t>(load(0));
  r.infection = volume_cast<std::uint8_t>(load(1));
  r.lung_labels = volume_cast<std::uint8_t>(load(2));
  if (r.intensity.kind() != VolumeKind::Intensity || r.infection.kind() != VolumeKind::Mask ||
      r.lung_labels.kind() != VolumeKind::Labels) {
    throw DataError("subject " + entry.id + ": files must be intensity, mask and labels volumes in that order");
  }
  return r;
}

std::vector<FeatureVector> extract_cohort(const std::filesystem::path& cohort_dir, const ExtractionOptions& options,
                                          int jobs) {
  const auto entries = read_cohort_manifest(cohort_dir);
  std::vector<FeatureVector> rows(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    const SubjectRecord subject = load_subject(cohort_dir, entries[i]);
    try {
      rows[i] = extract_feature_vector(subject, options);
    } catch (const DataError& e) {
      throw DataError("subject " + entries[i].id + ": " + e.what());
    }
  });
  return rows;
}

}  // namespace isarf
