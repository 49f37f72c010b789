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

#ifndef FOG__MANIFEST__MANIFEST_HPP_
#define FOG__MANIFEST__MANIFEST_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fog/wire/topic.hpp"

namespace fog::manifest
{

enum class NetworkMode
{
  kDirect,
  kProxy,
};

std::string_view to_string(NetworkMode mode);

struct Placement
{
  bool cloud = false;
  std::string group;

  static Placement edge() {return {};}
  static Placement in(std::string g) {return {true, std::move(g)};}
  std::string str() const;
  bool operator==(const Placement &) const = default;
};

struct NodeSpec
{
  std::string name;
  std::string package;
  std::string exec;
  std::vector<std::string> args;
  Placement placement;
  int line = 0;

  bool operator==(const NodeSpec & o) const;
};

struct CloudGroupSpec
{
  std::string name;
  std::string instance_type;
  std::optional<std::string> setup_script;
  std::optional<std::string> image;
  NetworkMode network = NetworkMode::kDirect;
  std::optional<std::vector<std::string>> topics;
  std::optional<std::string> region;
  int line = 0;
  std::map<std::string, int> key_lines;

  bool operator==(const CloudGroupSpec & o) const;
};

/// Line numbers are kept for diagnostics and ignored by equality.
struct LaunchManifest
{
  std::vector<NodeSpec> nodes;
  std::map<std::string, CloudGroupSpec> cloud_groups;

  bool operator==(const LaunchManifest &) const = default;

  std::vector<const NodeSpec *> nodes_in(const Placement & p) const;
};

/// Strict parser: unknown keys or sections, duplicates and dangling
/// placements throw ParseError with the offending line.
LaunchManifest parse_manifest(std::string_view text);
LaunchManifest load_manifest(const std::filesystem::path & path);

std::string render_manifest(const LaunchManifest & m);

std::map<std::string, std::set<std::string>> collect_packages(const LaunchManifest & m);

struct MachineSpec
{
  std::string instance_type;
  int worker_count = 1;
  bool gpu = false;
  int startup_delay_ms = 0;
  /// Fraction of one host core that each simulated core may use.
  double core_share = 1.0;

  bool operator==(const MachineSpec &) const = default;
};

class Catalog
{
public:
  Catalog() = default;
  explicit Catalog(std::vector<MachineSpec> machines);

  const MachineSpec * find(std::string_view instance_type) const;
  const std::map<std::string, MachineSpec, std::less<>> & machines() const {return machines_;}
  std::string render() const;

private:
  std::map<std::string, MachineSpec, std::less<>> machines_;
};

Catalog parse_catalog(std::string_view text);
Catalog load_catalog(const std::filesystem::path & path);
const Catalog & builtin_catalog();

enum class DiagCode
{
  kUnknownInstanceType,
  kMissingSetupScript,
  kInvalidTopic,
  kMissingPackage,
  kMissingImage,
};

std::string_view to_string(DiagCode code);

struct Diagnostic
{
  int line = 0;
  DiagCode code;
  std::string message;

  std::string str() const;
};

struct ValidateOptions
{
  /// Relative setup script paths are resolved against this directory.
  std::filesystem::path base_dir = ".";
  /// Directories searched for `<package>/` trees; empty skips the check.
  std::vector<std::filesystem::path> package_path;
  /// Directories searched for container images; empty skips the check.
  std::vector<std::filesystem::path> image_path;
};

/// Returns diagnostics sorted by (line, code); empty iff deployable.
std::vector<Diagnostic> validate(
  const LaunchManifest & m, const Catalog & catalog, const ValidateOptions & opts = {});

std::optional<std::filesystem::path> find_package(
  const std::vector<std::filesystem::path> & path, const std::string & package);
std::optional<std::filesystem::path> find_image(
  const std::vector<std::filesystem::path> & path, const std::string & image);
/// Directory name an image reference is stored under.
std::string image_dir_name(std::string_view image);

}  // namespace fog::manifest

#endif  // FOG__MANIFEST__MANIFEST_HPP_
