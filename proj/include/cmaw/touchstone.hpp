#pragma once

// Touchstone 1.x (.sNp) reader for S-parameter data.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cmaw/constants.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/error.hpp"

namespace cmaw {

/// Per-frequency N-port S-matrices. Port n drives element port_element[n].
struct PortNetwork {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<Eigen::MatrixXcd> s;
  double reference_impedance = 50.0;
  std::vector<std::size_t> port_element;

  std::size_t port_count() const { return s.empty() ? 0 : static_cast<std::size_t>(s.front().rows()); }

  void validate() const {
    detail::require(!frequencies.empty() && frequencies.size() == s.size(), "network has no frequency points");
    const auto n = s.front().rows();
    for (std::size_t i = 0; i < s.size(); ++i) {
      detail::require(s[i].rows() == n && s[i].cols() == n, "S-matrices must be square and of one size");
      detail::require(s[i].allFinite(), "S-matrix contains non-finite entries");
      if (i > 0) detail::require(frequencies[i] > frequencies[i - 1], "network frequencies must increase");
    }
    detail::require(port_element.size() == static_cast<std::size_t>(n), "port map size differs from port count");
  }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Token {
  std::string_view text;
  std::size_t line;
};

}  // namespace detail

/// Parses Touchstone 1.x text for an n_ports network. Honors the option line
/// `# <Hz|kHz|MHz|GHz> S <RI|MA|DB> R <z0>` (defaults GHz, MA, 50 ohm).
/// Records are whitespace-delimited and may wrap across lines; 2-port data
/// use the S11 S21 S12 S22 order, larger networks are row-major.
inline PortNetwork parse_touchstone(const std::string& text, std::size_t n_ports) {
  detail::require(n_ports >= 1, "port count must be >= 1");
  double unit = 1e9;
  enum class Format { RI, MA, DB } format = Format::MA;
  double z0 = 50.0;
  bool seen_option = false;

  std::vector<detail::Token> tokens;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);

    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) words.push_back(line.substr(start, i - start));
    }
    if (words.empty()) continue;

    if (words.front().front() == '#') {
      if (seen_option) continue;  // only the first option line counts
      seen_option = true;
      std::vector<std::string> opts;
      if (words.front().size() > 1) opts.push_back(detail::lower(words.front().substr(1)));
      for (std::size_t w = 1; w < words.size(); ++w) opts.push_back(detail::lower(words[w]));
      for (std::size_t w = 0; w < opts.size(); ++w) {
        const auto& o = opts[w];
        if (o == "hz") unit = 1.0;
        else if (o == "khz") unit = 1e3;
        else if (o == "mhz") unit = 1e6;
        else if (o == "ghz") unit = 1e9;
        else if (o == "ri") format = Format::RI;
        else if (o == "ma") format = Format::MA;
        else if (o == "db") format = Format::DB;
        else if (o == "s") continue;
        else if (o == "y" || o == "z" || o == "h" || o == "g")
          throw IoError("touchstone line " + std::to_string(line_no) + ": only S-parameters are supported");
        else if (o == "r") {
          if (w + 1 >= opts.size()) throw IoError("touchstone line " + std::to_string(line_no) + ": R without value");
          const auto& v = opts[++w];
          double r = 0.0;
          const auto res = std::from_chars(v.data(), v.data() + v.size(), r);
          if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !(r > 0.0))
            throw IoError("touchstone line " + std::to_string(line_no) + ": bad reference impedance '" + v + "'");
          z0 = r;
        } else {
          throw IoError("touchstone line " + std::to_string(line_no) + ": unknown option '" + o + "'");
        }
      }
      continue;
    }
    if (words.front().front() == '[') {
      throw IoError("touchstone line " + std::to_string(line_no) + ": version 2 keywords are not supported");
    }
    for (const auto& w : words) tokens.push_back({w, line_no});
  }

  const std::size_t per_record = 1 + 2 * n_ports * n_ports;
  if (tokens.empty()) throw IoError("touchstone: no data records");
  if (tokens.size() % per_record != 0) {
    throw IoError("touchstone line " + std::to_string(tokens.back().line) + ": incomplete record (expected " +
                  std::to_string(per_record) + " values per frequency)");
  }

  auto number = [](const detail::Token& t) {
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
      throw IoError("touchstone line " + std::to_string(t.line) + ": not a number: '" + std::string(t.text) + "'");
    return v;
  };

  PortNetwork net;
  net.reference_impedance = z0;
  const auto n = static_cast<Eigen::Index>(n_ports);
  for (std::size_t r = 0; r < tokens.size() / per_record; ++r) {
    const std::size_t base = r * per_record;
    const double f = number(tokens[base]) * unit;
    if (!net.frequencies.empty() && !(f > net.frequencies.back()))
      throw IoError("touchstone line " + std::to_string(tokens[base].line) + ": frequencies must increase");
    Eigen::MatrixXcd m(n, n);
    for (std::size_t k = 0; k < n_ports * n_ports; ++k) {
      const double a = number(tokens[base + 1 + 2 * k]);
      const double b = number(tokens[base + 2 + 2 * k]);
      cplx v;
      switch (format) {
        case Format::RI: v = cplx(a, b); break;
        case Format::MA: v = std::polar(a, b * kPi / 180.0); break;
        case Format::DB: v = std::polar(std::pow(10.0, a / 20.0), b * kPi / 180.0); break;
      }
      Eigen::Index row = static_cast<Eigen::Index>(k / n_ports);
      Eigen::Index col = static_cast<Eigen::Index>(k % n_ports);
      if (n_ports == 2) std::swap(row, col);  // S11 S21 S12 S22
      m(row, col) = v;
    }
    net.frequencies.push_back(f);
    net.s.push_back(std::move(m));
  }
  net.port_element.resize(n_ports);
  for (std::size_t p = 0; p < n_ports; ++p) net.port_element[p] = p;
  return net;
}

/// Port count from a `.sNp` extension (case-insensitive).
inline std::size_t touchstone_port_count(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = detail::lower(dot == std::string::npos ? "" : path.substr(dot + 1));
  if (ext.size() >= 3 && ext.front() == 's' && ext.back() == 'p') {
    const std::string digits = ext.substr(1, ext.size() - 2);
    std::size_t n = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (res.ec == std::errc{} && res.ptr == digits.data() + digits.size() && n >= 1) return n;
  }
  throw IoError("touchstone: cannot infer port count from file name '" + path + "'");
}

inline PortNetwork load_touchstone(const std::string& path) {
  const std::size_t n = touchstone_port_count(path);
  return parse_touchstone(csv::read_file(path), n);
}

}  // namespace cmaw
