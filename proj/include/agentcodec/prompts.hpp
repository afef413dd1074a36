#pragma once

#include <map>
#include <string>

namespace agentcodec {

/// Instruction texts for synthesis, critique, refinement, voting, parity and
/// decoding. Defaults are compiled in and identical to the copies under
/// data/prompts/; a directory of <name>.txt files can override any entry.
class PromptLibrary {
 public:
  PromptLibrary();

  const std::string& get(const std::string& name) const;
  void set(const std::string& name, std::string text);
  void load_overrides(const std::string& dir);

  static const PromptLibrary& instance();

 private:
  std::map<std::string, std::string> prompts_;
};

}  // namespace agentcodec
