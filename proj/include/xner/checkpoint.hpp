#pragma once

#include <iosfwd>
#include <string>

#include "xner/tagger.hpp"

namespace xner {

/// Tagger checkpoint, a line-oriented text container:
///
///   xner-tagger 1
///   # <provenance line>            (zero or more)
///   config <key> <value>           (every TaggerConfig field)
///   tagset <n> <tag>...
///   chars <n> <code point>...      (decimal, unknown row excluded)
///   tensor <name> <rows> <cols>    (followed by <rows> lines of %.17g values)
///   ...
///   end
///
/// Tensors appear in TaggerModel::parameters() order followed by
/// "unknown_word". Values print with 17 significant digits, so
/// save -> load -> save reproduces the file byte for byte.
void write_checkpoint(const TaggerModel& model, std::ostream& out);
void save_checkpoint(const TaggerModel& model, const std::string& path);
TaggerModel read_checkpoint(std::istream& in, const std::string& name);
TaggerModel load_checkpoint(const std::string& path);

}  // namespace xner
