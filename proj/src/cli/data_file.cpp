#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <string_view>

#include "apdscore/cli.hpp"

namespace apdscore::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<double> parse_data(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view token = trim(line);
    if (token.empty() || token.front() == '#') continue;
    double v = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    // from_chars rejects a leading '+'; accept it for hand-written files.
    if (*first == '+' && token.size() > 1 && first[1] != '-') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw InputError(source + ":" + std::to_string(line_no) + ": not a finite decimal: '" +
                       std::string(token) + "'");
    }
    values.push_back(v);
  }
  if (in.bad()) throw InputError(source + ": read error");
  if (values.size() < 2) {
    throw InputError(source + ": need at least 2 values, found " + std::to_string(values.size()));
  }
  return values;
}

DataFile read_data_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open for reading");
  return {path, parse_data(in, path.string())};
}

std::string format_real(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

}  // namespace apdscore::cli
