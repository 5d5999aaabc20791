// Copyright 2026 The fedprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedprint/trace_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "fedprint/errors.h"
#include "json.hpp"

namespace fedprint {
namespace {

using json = nlohmann::json;
// Record lines are parsed with 32-bit floats so every stored value reads back
// bit-exactly.
using json32 = nlohmann::basic_json<std::map, std::vector, std::string, bool,
                                    std::int64_t, std::uint64_t, float>;

constexpr int kFormatVersion = 1;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open for reading");
  return in;
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": malformed JSON: " + e.what());
  }
}

template <typename J, typename T>
T field(const J& obj, const char* key, const std::string& source) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InputError(source + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": field '" + key + "' has the wrong type");
  }
}

void append_float(std::string& out, double value) {
  char buf[32];
  const float f = static_cast<float>(value);
  if (!std::isfinite(f)) {
    out += "null";
    return;
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), f);
  out.append(buf, ptr);
}

json header_json(const TraceHeader& h) {
  json j;
  j["format_version"] = h.format_version;
  j["K"] = h.clients;
  j["T"] = h.rounds;
  j["seed"] = h.seed;
  j["layer_manifest"] = json::array();
  for (const LayerSpec& s : h.layer_manifest) {
    j["layer_manifest"].push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  }
  if (h.dp) {
    j["dp"] = {{"C", h.dp->config.clip},
               {"sigma", h.dp->config.sigma},
               {"delta", h.dp->config.delta},
               {"sample_rate", h.dp->sample_rate},
               {"steps", h.dp->steps},
               {"epsilon", std::isfinite(h.dp->epsilon) ? json(h.dp->epsilon) : json()}};
  } else {
    j["dp"] = nullptr;
  }
  if (!h.config.is_null()) j["config"] = h.config;
  if (!h.loss_curve.empty()) j["loss_curve"] = h.loss_curve;
  return j;
}

TraceHeader parse_header(const json& j, const std::string& source) {
  TraceHeader h;
  h.format_version = field<json, int>(j, "format_version", source);
  if (h.format_version != kFormatVersion) {
    throw InputError(source + ": unsupported trace format_version " +
                     std::to_string(h.format_version));
  }
  h.clients = field<json, std::size_t>(j, "K", source);
  h.rounds = field<json, std::size_t>(j, "T", source);
  h.seed = field<json, std::uint64_t>(j, "seed", source);
  for (const json& s : field<json, json>(j, "layer_manifest", source)) {
    h.layer_manifest.push_back(LayerSpec{field<json, std::string>(s, "name", source),
                                         field<json, std::size_t>(s, "rows", source),
                                         field<json, std::size_t>(s, "cols", source)});
  }
  if (j.contains("dp") && !j["dp"].is_null()) {
    const json& d = j["dp"];
    DpSummary s;
    s.config.clip = field<json, double>(d, "C", source);
    s.config.sigma = field<json, double>(d, "sigma", source);
    s.config.delta = field<json, double>(d, "delta", source);
    if (d.contains("sample_rate")) s.sample_rate = d["sample_rate"].get<double>();
    if (d.contains("steps")) s.steps = d["steps"].get<std::size_t>();
    s.epsilon = d.contains("epsilon") && !d["epsilon"].is_null()
                    ? d["epsilon"].get<double>()
                    : kInfiniteEpsilon;
    h.dp = s;
  }
  if (j.contains("config")) h.config = j["config"];
  if (j.contains("loss_curve")) h.loss_curve = j["loss_curve"].get<Vector>();
  return h;
}

}  // namespace

void write_trace(const TraceStore& trace, std::ostream& out) {
  out << header_json(trace.header()).dump() << '\n';
  const auto& manifest = trace.header().layer_manifest;
  std::string line;
  for (const TraceRecord& rec : trace.records()) {
    line.clear();
    line += "{\"round\":" + std::to_string(rec.round) +
            ",\"slot\":" + std::to_string(rec.slot) + ",\"layers\":{";
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      if (i) line += ',';
      line += '"' + manifest[i].name + "\":[";
      const Vector& v = rec.layers[i];
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) line += ',';
        append_float(line, v[k]);
      }
      line += ']';
    }
    line += "}}\n";
    out << line;
  }
}

void write_trace(const TraceStore& trace, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_trace(trace, out);
  if (!out) throw InputError(path.string() + ": write failed");
}

TraceStore read_trace(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty trace file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(source + ": malformed trace header: " + e.what());
  }
  TraceStore store(parse_header(header, source));
  const auto& manifest = store.header().layer_manifest;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json32 j;
    try {
      j = json32::parse(line);
    } catch (const json32::exception& e) {
      throw InputError(where + ": malformed record: " + e.what());
    }
    TraceRecord rec;
    rec.round = field<json32, std::size_t>(j, "round", where);
    rec.slot = field<json32, std::size_t>(j, "slot", where);
    const json32 layers = field<json32, json32>(j, "layers", where);
    for (const LayerSpec& spec : manifest) {
      if (!layers.contains(spec.name)) {
        throw InputError(where + ": record lacks layer '" + spec.name + "'");
      }
      const json32& arr = layers[spec.name];
      Vector values;
      values.reserve(arr.size());
      for (const json32& x : arr) {
        if (!x.is_number()) throw InputError(where + ": non-numeric value in " + spec.name);
        values.push_back(static_cast<double>(x.get<float>()));
      }
      rec.layers.push_back(std::move(values));
    }
    store.append(std::move(rec));
  }
  store.validate_complete();
  return store;
}

TraceStore read_trace(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_trace(in, path.string());
}

void write_truth(const TruthSidecar& truth, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << json{{"rounds", truth.rounds}}.dump() << '\n';
}

TruthSidecar read_truth(const std::filesystem::path& path) {
  const json j = parse_file(path);
  TruthSidecar truth;
  truth.rounds =
      field<json, std::vector<std::vector<int>>>(j, "rounds", path.string());
  return truth;
}

void write_assignment(const AssignmentFile& file, const std::filesystem::path& path) {
  const ClusterAssignment& a = file.assignment;
  json labels = json::array();
  for (std::size_t t = 0; t < a.rounds; ++t) {
    json row = json::array();
    for (std::size_t s = 0; s < a.clients; ++s) row.push_back(a.label(t, s));
    labels.push_back(std::move(row));
  }
  json j{{"format_version", kFormatVersion},
         {"method", file.method},
         {"selector", file.selector},
         {"seed", file.seed},
         {"K", a.clients},
         {"T", a.rounds},
         {"labels", std::move(labels)}};
  std::ofstream out = open_out(path);
  out << j.dump() << '\n';
}

AssignmentFile read_assignment(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const std::string src = path.string();
  AssignmentFile file;
  file.method = field<json, std::string>(j, "method", src);
  file.selector = field<json, std::string>(j, "selector", src);
  file.seed = field<json, std::uint64_t>(j, "seed", src);
  ClusterAssignment& a = file.assignment;
  a.clients = field<json, std::size_t>(j, "K", src);
  a.rounds = field<json, std::size_t>(j, "T", src);
  const auto rows = field<json, std::vector<std::vector<int>>>(j, "labels", src);
  if (rows.size() != a.rounds) throw InputError(src + ": labels must have T rows");
  for (const auto& row : rows) {
    if (row.size() != a.clients) throw InputError(src + ": each label row must have K entries");
    a.labels.insert(a.labels.end(), row.begin(), row.end());
  }
  return file;
}

}  // namespace fedprint
