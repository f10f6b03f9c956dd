#pragma once

#include <string>
#include <vector>

namespace nsqm {

// Built-in problem files, embedded so the binary is self-contained; the same
// texts are checked in under presets/ and a test keeps the copies in sync.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
const std::string& preset_text(const std::string& name);

}  // namespace nsqm
