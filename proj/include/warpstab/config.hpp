#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "warpstab/geometry.hpp"

namespace warpstab {

// `key = value` lines, '#' starts a comment, dotted keys (fiber.radius). Lists are
// comma separated. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  void erase(const std::string& key) { entries_.erase(key); }
  void merge(const KeyValueConfig& other);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string to_text() const;

 private:
  std::map<std::string, std::string> entries_;
  std::string source_ = "<config>";
};

// Manifold keys:
//   interval = half_line | full_line | segment   (segment.b, segment.c)
//   n
//   fiber.kind = sphere | custom                  (fiber.radius | fiber.scalar_curvature, fiber.area)
//   warping.kind = power | power_log | sinh | cosh | linear | constant | sampled
//   warping.coefficient, warping.exponent         (power)
//   warping.exponent, warping.log_power           (power_log)
//   warping.slope, warping.intercept              (linear)
//   warping.value                                 (constant)
//   warping.r, warping.rho  or  warping.file      (sampled; file has two columns r, rho)
//   warping.reflected = true|false                (optional)
WarpedProductSpec spec_from_config(const KeyValueConfig& cfg);
KeyValueConfig spec_to_config(const WarpedProductSpec& spec);

}  // namespace warpstab
