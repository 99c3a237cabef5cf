#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace apdscore::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kDegenerateData = 3,
  kUsageError = 64,
};

inline constexpr const char* kSchemaVersion = "1.0";

// Unreadable file, malformed token, or too few values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFile {
  std::filesystem::path path;
  std::vector<double> values;
};

// One decimal per line. Blank lines and lines whose first non-blank
// character is '#' are skipped; CRLF endings are accepted. Parsing is
// locale-independent. Throws InputError on any token that is not a finite
// decimal, or if fewer than two values remain.
std::vector<double> parse_data(std::istream& in, const std::string& source = "<stream>");
DataFile read_data_file(const std::filesystem::path& path);

// Shortest decimal that reads back as exactly x.
std::string format_real(double x);

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apdscore::cli
