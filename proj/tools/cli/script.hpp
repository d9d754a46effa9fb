#pragma once

#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace promptassist::cli {

// Wizard script mini-format, one command per line. Blank lines and lines
// starting with '#' are ignored.
//
//   type TEXT            TypeText, advance          type-add TEXT     no advance
//   accept TEXT          AcceptSuggestion, advance  accept-add TEXT   no advance
//   pick N               accept the Nth shown suggestion (1-based)   pick-add N
//   edit N TEXT          EditSuggestion of the Nth shown suggestion  edit-add N TEXT
//   skip | back | restart
//   replace WORD TEXT    ReplacedWord in the scene
//   suggest              show suggestions for the current step
//   more                 show further suggestions, excluding those already shown
//
// Every command except suggest and more produces exactly one event.

enum class Verb { Type, Accept, Pick, Edit, Skip, Back, Restart, Replace, Suggest, More };

struct ScriptCommand {
    Verb verb = Verb::Type;
    bool advance = true;
    std::string text;
    /// 1-based suggestion index for pick and edit.
    std::size_t index = 0;
    /// Word to replace for replace.
    std::string target;
    std::size_t line = 0;
};

class ScriptError : public std::runtime_error {
public:
    ScriptError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Throws ScriptError naming the first bad line.
ScriptCommand parse_script_line(std::string_view line, std::size_t line_number);
std::vector<ScriptCommand> parse_script(std::istream& in);

/// Characters typed to turn `original` into `edited`: the length of the
/// edited text between the common prefix and the common suffix.
std::size_t typed_chars_for_edit(std::string_view original, std::string_view edited);

}  // namespace promptassist::cli
