#include "activeteach/tutor/vocabulary.hpp"

#include <istream>
#include <unordered_set>

namespace activeteach::tutor {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<VocabularyItem> parse_vocabulary(std::istream& in) {
    std::vector<VocabularyItem> items;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;

        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            cells.push_back(trim(line.substr(start, tab - start)));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cells.size() != 3) {
            throw VocabularyError(line_no, "expected 3 tab-separated fields, found " +
                                               std::to_string(cells.size()));
        }
        if (cells[0].empty()) throw VocabularyError(line_no, "empty id");
        if (cells[1].empty()) throw VocabularyError(line_no, "empty prompt");
        if (cells[2].empty()) throw VocabularyError(line_no, "empty answer");
        if (!ids.insert(cells[0]).second) {
            throw VocabularyError(line_no, "duplicate id '" + cells[0] + "'");
        }
        items.push_back({cells[0], cells[1], cells[2]});
    }
    return items;
}

}  // namespace activeteach::tutor
