// Copyright 2026 The tracesyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic raw traces for tests. Shapes mimic public flow datasets.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trace.hpp"

namespace tracesyn::testing {

inline FieldSchema field(const std::string& name, FieldKind kind, FieldRole role = FieldRole::kFeature) {
  return {name, kind, role};
}

inline std::int64_t ipv4(int a, int b, int c, int d) {
  return (static_cast<std::int64_t>(a) << 24) | (b << 16) | (c << 8) | d;
}

// ts, td, srcip, dstip, srcport, dstport, proto, pkt, byt, type.
inline Schema ugr16_schema() {
  return {field("ts", FieldKind::kTimestamp),      field("td", FieldKind::kInteger),
          field("srcip", FieldKind::kIp),           field("dstip", FieldKind::kIp),
          field("srcport", FieldKind::kPort),       field("dstport", FieldKind::kPort),
          field("proto", FieldKind::kCategorical),  field("pkt", FieldKind::kInteger),
          field("byt", FieldKind::kInteger),        field("type", FieldKind::kCategorical, FieldRole::kLabel)};
}

// Flow records in the ugr16 layout: a few hosts, service ports, long-tailed
// counters with byt >= pkt, FTP mostly over TCP, bursty arrival times.
inline TraceDataset ugr16_like(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  TraceDataset d;
  d.schema = ugr16_schema();
  std::vector<std::int64_t> clients;
  std::vector<std::int64_t> servers;
  for (int i = 0; i < 60; ++i) clients.push_back(ipv4(10, 0, i / 8, 1 + i % 200));
  for (int i = 0; i < 12; ++i) servers.push_back(ipv4(42, 219, 150, 240 + i));
  std::discrete_distribution<int> client_pick({30, 20, 10, 8, 5, 5, 4, 3, 3, 2, 2, 2, 1, 1, 1, 1, 1});
  const std::vector<std::int64_t> services = {80, 443, 53, 21, 20, 22, 25, 123, 8080, 3389};
  std::discrete_distribution<int> service_pick({30, 25, 20, 4, 2, 6, 3, 3, 4, 3});
  const std::vector<std::string> labels = {"background", "background", "background", "scan", "dos"};
  std::uniform_int_distribution<int> label_pick(0, static_cast<int>(labels.size()) - 1);
  std::int64_t ts = 1458000000000;
  for (std::size_t i = 0; i < n; ++i) {
    ts += std::geometric_distribution<int>(0.05)(g);
    const std::string& type = labels[static_cast<std::size_t>(label_pick(g))];
    std::int64_t src = clients[static_cast<std::size_t>(client_pick(g)) % clients.size()];
    if (g() % 4 == 0) src = clients[g() % clients.size()];
    std::int64_t dst = servers[g() % servers.size()];
    std::int64_t dport = type == "scan" ? static_cast<std::int64_t>(g() % 4000) : services[static_cast<std::size_t>(service_pick(g))];
    std::int64_t sport = 1024 + static_cast<std::int64_t>(g() % 64511);
    std::string proto = dport == 53 || dport == 123 ? "UDP" : "TCP";
    if ((dport == 20 || dport == 21) && g() % 20 == 0) proto = "UDP";
    if (type == "dos" && g() % 3 == 0) proto = "ICMP";
    std::int64_t pkt = 1 + static_cast<std::int64_t>(std::exponential_distribution<double>(type == "background" ? 0.05 : 0.5)(g));
    std::int64_t byt = pkt * (40 + static_cast<std::int64_t>(g() % 1460));
    std::int64_t td = static_cast<std::int64_t>(std::exponential_distribution<double>(0.002)(g));
    d.records.push_back({{ts, td, src, dst, sport, dport, proto, pkt, byt, type}});
  }
  return d;
}

// Five attributes, no timestamp: label <-> service strongly dependent, the
// rest independent of everything.
inline TraceDataset planted_correlation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  TraceDataset d;
  d.schema = {field("label", FieldKind::kCategorical, FieldRole::kKeyAttribute),
              field("service", FieldKind::kCategorical), field("region", FieldKind::kCategorical),
              field("size", FieldKind::kInteger), field("dstport", FieldKind::kPort)};
  const std::vector<std::string> label_values = {"benign", "scan", "ddos", "brute"};
  std::discrete_distribution<int> label_pick({55, 20, 15, 10});
  const std::vector<std::string> services = {"http", "dns", "ssh", "ftp", "smtp", "ntp"};
  // service | label: each label concentrates on its own services.
  const std::vector<std::vector<double>> service_given_label = {
      {60, 25, 5, 3, 5, 2}, {5, 5, 60, 20, 5, 5}, {10, 70, 2, 2, 2, 14}, {3, 2, 45, 45, 3, 2}};
  const std::vector<std::string> regions = {"eu", "us", "apac", "latam", "af"};
  std::discrete_distribution<int> region_pick({30, 30, 20, 12, 8});
  const std::vector<std::int64_t> ports = {80, 443, 53, 22, 21, 25, 8080};
  std::discrete_distribution<int> port_pick({25, 25, 15, 10, 5, 10, 10});
  for (std::size_t i = 0; i < n; ++i) {
    int l = label_pick(g);
    std::discrete_distribution<int> s(service_given_label[l].begin(), service_given_label[l].end());
    std::int64_t size = static_cast<std::int64_t>(std::exponential_distribution<double>(0.01)(g));
    d.records.push_back({{label_values[static_cast<std::size_t>(l)], services[static_cast<std::size_t>(s(g))],
                          regions[static_cast<std::size_t>(region_pick(g))], size,
                          ports[static_cast<std::size_t>(port_pick(g))]}});
  }
  return d;
}

// Eleven attributes at the scale of the public IoT network trace subset.
inline TraceDataset ton_like(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  TraceDataset d;
  d.schema = {field("ts", FieldKind::kTimestamp),        field("srcip", FieldKind::kIp),
              field("srcport", FieldKind::kPort),        field("dstip", FieldKind::kIp),
              field("dstport", FieldKind::kPort),        field("proto", FieldKind::kCategorical),
              field("duration", FieldKind::kFloat),      field("src_bytes", FieldKind::kInteger),
              field("dst_bytes", FieldKind::kInteger),   field("conn_state", FieldKind::kCategorical),
              field("type", FieldKind::kCategorical, FieldRole::kLabel)};
  const std::vector<std::string> types = {"normal", "scanning", "dos", "ddos", "injection", "password",
                                          "xss", "backdoor", "ransomware", "mitm"};
  std::discrete_distribution<int> type_pick({40, 15, 10, 10, 7, 7, 5, 3, 2, 1});
  const std::vector<std::string> states = {"SF", "S0", "REJ", "OTH", "RSTO", "SH", "S1"};
  std::discrete_distribution<int> state_pick({45, 25, 10, 8, 5, 4, 3});
  const std::vector<std::int64_t> ports = {53, 80, 443, 22, 21, 1883, 8080, 445, 139, 3306};
  std::discrete_distribution<int> port_pick({28, 20, 15, 6, 3, 6, 8, 5, 5, 4});
  std::int64_t ts = 1554000000000;
  for (std::size_t i = 0; i < n; ++i) {
    ts += std::geometric_distribution<int>(0.3)(g);
    int t = type_pick(g);
    std::int64_t src = ipv4(192, 168, 1, 1 + static_cast<int>(g() % 250));
    if (g() % 5 == 0) src = ipv4(10, static_cast<int>(g() % 8), static_cast<int>(g() % 256), static_cast<int>(g() % 256));
    std::int64_t dst = ipv4(192, 168, 1, 1 + static_cast<int>(g() % 40));
    std::int64_t dport = t == 1 ? static_cast<std::int64_t>(g() % 65536) : ports[static_cast<std::size_t>(port_pick(g))];
    std::string proto = dport == 53 ? "udp" : (g() % 50 == 0 ? "icmp" : "tcp");
    double duration = std::exponential_distribution<double>(t == 0 ? 0.2 : 2.0)(g);
    std::int64_t sb = static_cast<std::int64_t>(std::exponential_distribution<double>(t == 0 ? 1e-3 : 1e-2)(g));
    std::int64_t db = static_cast<std::int64_t>(std::exponential_distribution<double>(1e-3)(g));
    d.records.push_back({{ts, src, static_cast<std::int64_t>(1024 + g() % 64511), dst, dport, proto, duration, sb,
                          db, states[static_cast<std::size_t>(state_pick(g))], types[static_cast<std::size_t>(t)]}});
  }
  return d;
}

}  // namespace tracesyn::testing
