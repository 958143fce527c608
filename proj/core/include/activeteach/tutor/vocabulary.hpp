#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "activeteach/errors.hpp"

namespace activeteach::tutor {

struct VocabularyItem {
    std::string id;
    std::string prompt;  // source form shown to the learner
    std::string answer;  // target form the learner has to pick

    friend bool operator==(const VocabularyItem&, const VocabularyItem&) = default;
};

class VocabularyError : public Error {
public:
    VocabularyError(std::size_t line, const std::string& what)
        : Error("vocabulary line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/**
 * Reads `id<TAB>prompt<TAB>answer` lines. Blank lines and lines starting with '#' are skipped.
 * Any malformed line or duplicate id rejects the whole document (VocabularyError).
 */
std::vector<VocabularyItem> parse_vocabulary(std::istream& in);

}  // namespace activeteach::tutor
