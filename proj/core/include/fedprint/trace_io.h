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

#ifndef FEDPRINT_TRACE_IO_H_
#define FEDPRINT_TRACE_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "fedprint/attack.h"
#include "fedprint/fedsim.h"

namespace fedprint {

// Trace files are line-oriented JSON. Line 1 is the header
//   {format_version, K, T, seed, layer_manifest:[{name, rows, cols}],
//    dp:{C, sigma, delta, sample_rate, steps, epsilon} | null,
//    config, loss_curve}
// and each further line one record
//   {round, slot, layers:{name:[values...]}}
// with values written as shortest round-trip 32-bit decimals.
void write_trace(const TraceStore& trace, std::ostream& out);
void write_trace(const TraceStore& trace, const std::filesystem::path& path);
TraceStore read_trace(std::istream& in, const std::string& source = "<stream>");
TraceStore read_trace(const std::filesystem::path& path);

// {rounds: [[client id per slot] per round]}
void write_truth(const TruthSidecar& truth, const std::filesystem::path& path);
TruthSidecar read_truth(const std::filesystem::path& path);

struct AssignmentFile {
  std::string method;
  std::string selector;
  std::uint64_t seed = 0;
  ClusterAssignment assignment;
};

// {format_version, method, selector, seed, K, T, labels: [[label per slot] per round]}
void write_assignment(const AssignmentFile& file, const std::filesystem::path& path);
AssignmentFile read_assignment(const std::filesystem::path& path);

}  // namespace fedprint

#endif  // FEDPRINT_TRACE_IO_H_
