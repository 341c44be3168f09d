#include "ieaie/report.hpp"

#include <cstdio>
#include <fstream>

#include "ieaie/io.hpp"

namespace ieaie {

Json report_header(std::string_view kind) {
  Json j;
  j["schema"] = kReportSchema;
  j["kind"] = kind;
  return j;
}

Json to_json(Position p) { return Json::array({p.row, p.col}); }

Json to_json(const Image& img) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < img.rows(); ++i) {
    const auto r = img.row(i);
    rows.push_back(Json(std::vector<int>(r.begin(), r.end())));
  }
  return rows;
}

Json to_json(const GraphStats& stats) {
  Json j;
  j["nodes"] = stats.nodes;
  j["components"] = stats.components;
  j["component_sizes"] = stats.component_sizes;
  j["cycle_lengths"] = stats.cycle_lengths;
  j["max_tail"] = stats.max_tail;
  j["self_loops"] = stats.self_loops;
  return j;
}

Json to_json(const Correlation& c) {
  Json j;
  j["value"] = c.degenerate ? Json(nullptr) : Json(c.value);
  j["degenerate"] = c.degenerate;
  j["pairs"] = c.pairs;
  return j;
}

Json to_json(const MetricsReport& m) {
  Json j;
  j["entropy"] = m.entropy;
  j["histogram_variance"] = m.hist_variance;
  j["correlation"] = {{"horizontal", to_json(m.horizontal)},
                      {"vertical", to_json(m.vertical)},
                      {"diagonal", to_json(m.diagonal)}};
  if (m.npcr) j["npcr"] = *m.npcr;
  if (m.uaci) j["uaci"] = *m.uaci;
  return j;
}

Json to_json(const Keystream& ks) {
  Json j;
  j["rows"] = ks.k.rows();
  j["cols"] = ks.k.cols();
  j["a"] = ks.ab.a;
  j["b"] = ks.ab.b;
  j["u_raw"] = ks.raw.u;
  j["v_raw"] = ks.raw.v;
  j["u"] = ks.u;
  j["v"] = ks.v;
  j["K"] = to_json(ks.k);
  return j;
}

Json to_json(const EquivalentKey& key) {
  Json perm = Json::array();
  for (std::size_t i = 0; i < key.perm.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < key.perm.cols(); ++j) row.push_back(to_json(key.perm(i, j)));
    perm.push_back(std::move(row));
  }
  Json j;
  j["rows"] = key.perm.rows();
  j["cols"] = key.perm.cols();
  j["perm"] = std::move(perm);
  j["D"] = to_json(key.D);
  j["d"] = key.d;
  j["s"] = key.s_class;
  return j;
}

Json to_json(const QueryRecord& q) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(q.digest));
  Json j;
  j["phase"] = q.phase;
  j["digest"] = digest;
  j["position"] = q.position ? to_json(*q.position) : Json(nullptr);
  j["first_nonzero"] = q.first_nonzero ? to_json(*q.first_nonzero) : Json(nullptr);
  return j;
}

Json to_json(const VerificationReport& v) {
  Json j;
  j["trials"] = v.trials;
  j["matches"] = v.matches;
  j["match_rate"] = v.match_rate();
  j["first_failing_trial"] = v.first_failing_trial ? Json(*v.first_failing_trial) : Json(nullptr);
  j["first_failing_position"] =
      v.first_failing_position ? to_json(*v.first_failing_position) : Json(nullptr);
  return j;
}

EquivalentKey equivalent_key_from_json(const Json& j) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    EquivalentKey key;
    key.perm = PermutationMap(rows, cols);
    key.D = Matrix<std::uint8_t>(rows, cols);
    const Json& perm = j.at("perm");
    const Json& dm = j.at("D");
    if (perm.size() != rows || dm.size() != rows) throw FormatError("row count mismatch");
    for (std::size_t i = 0; i < rows; ++i) {
      if (perm[i].size() != cols || dm[i].size() != cols) throw FormatError("column count mismatch");
      for (std::size_t c = 0; c < cols; ++c) {
        key.perm(i, c) = {perm[i][c].at(0).get<std::size_t>(), perm[i][c].at(1).get<std::size_t>()};
        key.D(i, c) = dm[i][c].get<std::uint8_t>();
      }
    }
    key.d = j.at("d").get<DiffusionParams>();
    key.s_class = j.at("s").get<double>();
    if (key.d.size() != cols || !is_bijection(key.perm)) {
      throw FormatError("inconsistent equivalent key");
    }
    return key;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed equivalent key JSON: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace ieaie
