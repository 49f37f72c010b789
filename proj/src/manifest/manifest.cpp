// Copyright 2026 The fogbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fog/manifest/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fog/common/kvfile.hpp"

namespace fog::manifest
{
namespace
{

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void unknown_key(const KvEntry & e, std::string_view section)
{
  throw ParseError(ErrorCode::kUnknownKey, e.line,
          "unknown key '" + e.key + "' in " + std::string(section) + " section");
}

NodeSpec parse_node(const KvSection & s)
{
  NodeSpec n;
  n.name = s.name;
  n.line = s.line;
  for (const auto & e : s.entries) {
    if (e.key == "package") {
      n.package = e.value;
    } else if (e.key == "exec") {
      n.exec = e.value;
    } else if (e.key == "args") {
      n.args = split_list(e.value, e.line);
    } else if (e.key == "placement") {
      if (e.value == "edge") {
        n.placement = Placement::edge();
      } else if (e.value.rfind("cloud:", 0) == 0 && e.value.size() > 6) {
        n.placement = Placement::in(e.value.substr(6));
      } else {
        throw ParseError(ErrorCode::kSyntaxError, e.line,
                "placement must be 'edge' or 'cloud:<group>'");
      }
    } else {
      unknown_key(e, "node");
    }
  }
  return n;
}

CloudGroupSpec parse_group(const KvSection & s)
{
  CloudGroupSpec g;
  g.name = s.name;
  g.line = s.line;
  for (const auto & e : s.entries) {
    g.key_lines[e.key] = e.line;
    if (e.key == "instance_type") {
      g.instance_type = e.value;
    } else if (e.key == "setup_script") {
      g.setup_script = e.value;
    } else if (e.key == "image") {
      g.image = e.value;
    } else if (e.key == "network") {
      if (e.value == "direct") {
        g.network = NetworkMode::kDirect;
      } else if (e.value == "proxy") {
        g.network = NetworkMode::kProxy;
      } else {
        throw ParseError(ErrorCode::kSyntaxError, e.line, "network must be 'direct' or 'proxy'");
      }
    } else if (e.key == "topics") {
      g.topics = split_list(e.value, e.line);
      if (g.topics->empty()) {
        throw ParseError(ErrorCode::kSyntaxError, e.line, "topics list must not be empty");
      }
    } else if (e.key == "region") {
      g.region = e.value;
    } else {
      unknown_key(e, "cloud");
    }
  }
  if (g.instance_type.empty()) {
    throw ParseError(ErrorCode::kSyntaxError, s.line,
            "cloud group '" + g.name + "' needs an instance_type");
  }
  for (const auto * opt : {&g.setup_script, &g.image, &g.region}) {
    if (opt->has_value() && (*opt)->empty()) {
      throw ParseError(ErrorCode::kSyntaxError, s.line, "empty value in cloud group '" + g.name + "'");
    }
  }
  return g;
}

}  // namespace

std::string_view to_string(NetworkMode mode)
{
  return mode == NetworkMode::kProxy ? "proxy" : "direct";
}

std::string Placement::str() const
{
  return cloud ? "cloud:" + group : "edge";
}

bool NodeSpec::operator==(const NodeSpec & o) const
{
  return name == o.name && package == o.package && exec == o.exec && args == o.args &&
         placement == o.placement;
}

bool CloudGroupSpec::operator==(const CloudGroupSpec & o) const
{
  return name == o.name && instance_type == o.instance_type && setup_script == o.setup_script &&
         image == o.image && network == o.network && topics == o.topics && region == o.region;
}

std::vector<const NodeSpec *> LaunchManifest::nodes_in(const Placement & p) const
{
  std::vector<const NodeSpec *> out;
  for (const auto & n : nodes) {
    if (n.placement == p) {
      out.push_back(&n);
    }
  }
  return out;
}

LaunchManifest parse_manifest(std::string_view text)
{
  LaunchManifest m;
  std::vector<int> placement_lines;
  for (const auto & s : parse_sections(text)) {
    if (s.kind == "node") {
      for (const auto & n : m.nodes) {
        if (n.name == s.name) {
          throw ParseError(ErrorCode::kDuplicateNode, s.line, "duplicate node '" + s.name + "'");
        }
      }
      m.nodes.push_back(parse_node(s));
      const auto * p = s.find("placement");
      placement_lines.push_back(p ? p->line : s.line);
    } else if (s.kind == "cloud") {
      if (m.cloud_groups.count(s.name)) {
        throw ParseError(ErrorCode::kSyntaxError, s.line, "duplicate cloud group '" + s.name + "'");
      }
      m.cloud_groups.emplace(s.name, parse_group(s));
    } else {
      throw ParseError(ErrorCode::kUnknownKey, s.line, "unknown section kind '" + s.kind + "'");
    }
  }
  if (m.nodes.empty()) {
    throw ParseError(ErrorCode::kInvalidManifest, 1, "manifest declares no nodes");
  }
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const auto & n = m.nodes[i];
    const CloudGroupSpec * group = nullptr;
    if (n.placement.cloud) {
      auto it = m.cloud_groups.find(n.placement.group);
      if (it == m.cloud_groups.end()) {
        throw ParseError(ErrorCode::kDanglingGroupRef, placement_lines[i],
                "node '" + n.name + "' references unknown group '" + n.placement.group + "'");
      }
      group = &it->second;
    }
    bool container = group && group->image;
    if (container && (!n.package.empty() || !n.exec.empty())) {
      throw ParseError(ErrorCode::kInvalidManifest, n.line,
              "node '" + n.name + "' sets package/exec inside container group '" + group->name + "'");
    }
    if (!container && (n.package.empty() || n.exec.empty())) {
      throw ParseError(ErrorCode::kInvalidManifest, n.line,
              "node '" + n.name + "' needs both package and exec");
    }
  }
  return m;
}

LaunchManifest load_manifest(const std::filesystem::path & path)
{
  return parse_manifest(read_file(path));
}

std::string render_manifest(const LaunchManifest & m)
{
  std::string out;
  for (const auto & [name, g] : m.cloud_groups) {
    KvSection s{"cloud", name, 0, {}};
    s.entries.push_back({"instance_type", g.instance_type, 0});
    if (g.setup_script) {
      s.entries.push_back({"setup_script", *g.setup_script, 0});
    }
    if (g.image) {
      s.entries.push_back({"image", *g.image, 0});
    }
    s.entries.push_back({"network", std::string(to_string(g.network)), 0});
    if (g.topics) {
      s.entries.push_back({"topics", join_list(*g.topics), 0});
    }
    if (g.region) {
      s.entries.push_back({"region", *g.region, 0});
    }
    out += render_section(s);
    out += '\n';
  }
  for (const auto & n : m.nodes) {
    KvSection s{"node", n.name, 0, {}};
    if (!n.package.empty()) {
      s.entries.push_back({"package", n.package, 0});
    }
    if (!n.exec.empty()) {
      s.entries.push_back({"exec", n.exec, 0});
    }
    if (!n.args.empty()) {
      s.entries.push_back({"args", join_list(n.args), 0});
    }
    s.entries.push_back({"placement", n.placement.str(), 0});
    out += render_section(s);
    out += '\n';
  }
  return out;
}

std::map<std::string, std::set<std::string>> collect_packages(const LaunchManifest & m)
{
  std::map<std::string, std::set<std::string>> out;
  for (const auto & n : m.nodes) {
    if (n.placement.cloud && !n.package.empty()) {
      out[n.placement.group].insert(n.package);
    }
  }
  return out;
}

Catalog::Catalog(std::vector<MachineSpec> machines)
{
  for (auto & m : machines) {
    auto key = m.instance_type;
    machines_[key] = std::move(m);
  }
}

const MachineSpec * Catalog::find(std::string_view instance_type) const
{
  auto it = machines_.find(instance_type);
  return it == machines_.end() ? nullptr : &it->second;
}

std::string Catalog::render() const
{
  std::string out;
  for (const auto & [name, m] : machines_) {
    std::ostringstream share;
    share << m.core_share;
    out += render_section(KvSection{"machine", name, 0, {
        {"workers", std::to_string(m.worker_count), 0},
        {"gpu", m.gpu ? "true" : "false", 0},
        {"startup_delay_ms", std::to_string(m.startup_delay_ms), 0},
        {"core_share", share.str(), 0},
      }});
    out += '\n';
  }
  return out;
}

Catalog parse_catalog(std::string_view text)
{
  std::vector<MachineSpec> machines;
  for (const auto & s : parse_sections(text)) {
    if (s.kind != "machine") {
      throw ParseError(ErrorCode::kUnknownKey, s.line, "unknown section kind '" + s.kind + "'");
    }
    MachineSpec m;
    m.instance_type = s.name;
    for (const auto & e : s.entries) {
      if (e.key == "workers") {
        auto w = parse_int(e.value, e.line);
        if (w < 1 || w > 1024) {
          throw ParseError(ErrorCode::kSyntaxError, e.line, "workers must be between 1 and 1024");
        }
        m.worker_count = static_cast<int>(w);
      } else if (e.key == "gpu") {
        m.gpu = parse_bool(e.value, e.line);
      } else if (e.key == "startup_delay_ms") {
        auto d = parse_int(e.value, e.line);
        if (d < 0 || d > 600000) {
          throw ParseError(ErrorCode::kSyntaxError, e.line, "startup_delay_ms out of range");
        }
        m.startup_delay_ms = static_cast<int>(d);
      } else if (e.key == "core_share") {
        m.core_share = parse_double(e.value, e.line);
        if (!(m.core_share > 0.0 && m.core_share <= 1.0)) {
          throw ParseError(ErrorCode::kSyntaxError, e.line, "core_share must be in (0, 1]");
        }
      } else {
        unknown_key(e, "machine");
      }
    }
    machines.push_back(m);
  }
  return Catalog(std::move(machines));
}

Catalog load_catalog(const std::filesystem::path & path)
{
  return parse_catalog(read_file(path));
}

const Catalog & builtin_catalog()
{
  static const Catalog catalog(std::vector<MachineSpec>{
      {"t2.micro", 1, false, 20, 0.1},
      {"c5.24xlarge", 8, false, 50, 0.1},
      {"c4.8xlarge", 8, false, 50, 0.1},
      {"g4dn.xlarge", 4, true, 50, 0.1},
    });
  return catalog;
}

std::string_view to_string(DiagCode code)
{
  switch (code) {
    case DiagCode::kUnknownInstanceType: return "UnknownInstanceType";
    case DiagCode::kMissingSetupScript: return "MissingSetupScript";
    case DiagCode::kInvalidTopic: return "InvalidTopic";
    case DiagCode::kMissingPackage: return "MissingPackage";
    case DiagCode::kMissingImage: return "MissingImage";
  }
  return "?";
}

std::string Diagnostic::str() const
{
  return "line " + std::to_string(line) + ": " + std::string(to_string(code)) + ": " + message;
}

std::string image_dir_name(std::string_view image)
{
  std::string out(image);
  std::replace(out.begin(), out.end(), ':', '_');
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

std::optional<std::filesystem::path> find_package(
  const std::vector<std::filesystem::path> & path, const std::string & package)
{
  for (const auto & dir : path) {
    auto p = dir / package;
    std::error_code ec;
    if (std::filesystem::is_directory(p, ec)) {
      return p;
    }
  }
  return std::nullopt;
}

std::optional<std::filesystem::path> find_image(
  const std::vector<std::filesystem::path> & path, const std::string & image)
{
  return find_package(path, image_dir_name(image));
}

std::vector<Diagnostic> validate(
  const LaunchManifest & m, const Catalog & catalog, const ValidateOptions & opts)
{
  std::vector<Diagnostic> out;
  auto key_line = [](const CloudGroupSpec & g, const std::string & key) {
      auto it = g.key_lines.find(key);
      return it == g.key_lines.end() ? g.line : it->second;
    };
  for (const auto & [name, g] : m.cloud_groups) {
    if (!catalog.find(g.instance_type)) {
      out.push_back({key_line(g, "instance_type"), DiagCode::kUnknownInstanceType,
          "group '" + name + "': unknown instance type '" + g.instance_type + "'"});
    }
    if (g.setup_script) {
      std::filesystem::path p(*g.setup_script);
      if (p.is_relative()) {
        p = opts.base_dir / p;
      }
      std::ifstream probe(p);
      std::error_code ec;
      if (!probe || !std::filesystem::is_regular_file(p, ec)) {
        out.push_back({key_line(g, "setup_script"), DiagCode::kMissingSetupScript,
            "group '" + name + "': setup script '" + *g.setup_script + "' is not readable"});
      }
    }
    if (g.topics) {
      for (const auto & t : *g.topics) {
        if (!TopicName::is_valid(t)) {
          out.push_back({key_line(g, "topics"), DiagCode::kInvalidTopic,
              "group '" + name + "': invalid topic '" + t + "'"});
        }
      }
    }
    if (g.image && !opts.image_path.empty() && !find_image(opts.image_path, *g.image)) {
      out.push_back({key_line(g, "image"), DiagCode::kMissingImage,
          "group '" + name + "': image '" + *g.image + "' not found"});
    }
  }
  if (!opts.package_path.empty()) {
    for (const auto & n : m.nodes) {
      if (!n.package.empty() && !find_package(opts.package_path, n.package)) {
        out.push_back({n.line, DiagCode::kMissingPackage,
            "node '" + n.name + "': package '" + n.package + "' not found"});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic & a, const Diagnostic & b) {
      return std::tie(a.line, a.code) < std::tie(b.line, b.code);
    });
  return out;
}

}  // namespace fog::manifest
