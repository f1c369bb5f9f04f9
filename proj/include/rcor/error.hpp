#pragma once

#include <stdexcept>
#include <string>

namespace rcor {

// A statistic's defining ratio has an invalid denominator (constant margins,
// empty dominance counts, nonpositive variance terms, ...). Callers that run
// resampling loops treat these as "undefined on this replicate".
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file was readable but its content is not what the format requires
// (non-numeric cells, ragged rows, ...). Messages carry row/column positions.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcor
