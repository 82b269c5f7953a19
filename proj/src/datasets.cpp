#include "promptloop/datasets.hpp"

#include "promptloop/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace promptloop {

using nlohmann::json;

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

std::optional<Split> split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    return std::nullopt;
}

int SplitSpec::size_of(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::validation: return validation;
        case Split::test: return test;
    }
    return 0;
}

SplitSpec split_spec(TaskKind dataset) {
    switch (dataset) {
        case TaskKind::object_counting: return {dataset, 50, 100, 100};
        case TaskKind::word_sorting: return {dataset, 50, 100, 100};
        case TaskKind::gsm8k: return {dataset, 200, 300, 1319};
        case TaskKind::svamp: return {dataset, 2516, 622, 1000};
        case TaskKind::aquarat: return {dataset, 97467, 254, 254};
    }
    throw UnsupportedTaskError("unknown dataset");
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Finds maximal number tokens: optional sign and dollar sign, digit groups
// with thousands separators, optional decimal part. Returns (start, text).
std::vector<std::pair<std::size_t, std::string>> scan_numbers(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        // Attach a bare leading decimal point (".5"), a '$', and a sign when
        // directly adjacent.
        if (start > 0 && text[start - 1] == '.' &&
            (start < 2 || !is_digit(text[start - 2]))) {
            --start;
        }
        if (start > 0 && text[start - 1] == '$') --start;
        if (start > 0 && (text[start - 1] == '-' || text[start - 1] == '+')) {
            // A sign counts only when it starts a token, not as a binary operator.
            char before = (start >= 2) ? text[start - 2] : ' ';
            if (!std::isalnum(static_cast<unsigned char>(before)) && before != '.' &&
                before != ')') {
                --start;
            }
        }
        std::size_t end = i;
        while (end < n) {
            if (is_digit(text[end])) {
                ++end;
            } else if (text[end] == ',' && end + 3 < n && is_digit(text[end + 1]) &&
                       is_digit(text[end + 2]) && is_digit(text[end + 3]) &&
                       (end + 4 >= n || !is_digit(text[end + 4]))) {
                // Thousands separator: groups of exactly three digits.
                end += 4;
            } else if (text[end] == '.' && end + 1 < n && is_digit(text[end + 1])) {
                ++end;
                while (end < n && is_digit(text[end])) ++end;
                break;
            } else {
                break;
            }
        }
        out.emplace_back(start, text.substr(start, end - start));
        i = end;
    }
    return out;
}

const char* kAnswerMarkers[] = {"####", "answer:", "answer :", "answer is", "answer was",
                                "answer =", "answer="};

// Position just past the last answer marker, if any.
std::optional<std::size_t> after_last_marker(const std::string& hay_lower) {
    std::optional<std::size_t> best;
    for (const char* marker : kAnswerMarkers) {
        std::size_t pos = hay_lower.rfind(marker);
        if (pos == std::string::npos) continue;
        std::size_t end = pos + std::char_traits<char>::length(marker);
        if (!best || end > *best) best = end;
    }
    return best;
}

std::optional<NormalizedAnswer> extract_number(const std::string& raw) {
    std::vector<std::pair<std::size_t, std::string>> numbers;
    for (const auto& [pos, text] : scan_numbers(raw)) {
        if (auto canon = canonicalize_number(text)) numbers.emplace_back(pos, *canon);
    }
    if (numbers.empty()) return std::nullopt;
    const std::string hay = lower(raw);
    std::string picked;
    if (auto after = after_last_marker(hay)) {
        // First number after the last answer marker.
        for (const auto& [pos, text] : numbers) {
            if (pos >= *after) {
                picked = text;
                break;
            }
        }
    }
    if (picked.empty()) picked = numbers.back().second;
    NormalizedAnswer a;
    a.kind = NormalizedAnswer::Kind::number;
    a.number = picked;
    return a;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        // Strip surrounding punctuation, keep inner hyphens/apostrophes.
        std::size_t b = 0, e = current.size();
        const std::string strip = ".,;:!?\"'()[]{}<>*_`|";
        while (b < e && strip.find(current[b]) != std::string::npos) ++b;
        while (e > b && strip.find(current[e - 1]) != std::string::npos) --e;
        if (e > b) tokens.push_back(lower(current.substr(b, e - b)));
        current.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            flush();
        } else {
            current.push_back(c);
        }
    }
    flush();
    return tokens;
}

const char* kListMarkers[] = {"answer", "sorted"};

std::optional<NormalizedAnswer> extract_word_list(const std::string& raw) {
    auto lines = split_lines(raw);
    int marker_line = -1;
    std::size_t marker_pos = 0;
    std::size_t marker_end = 0;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string low = lower(lines[li]);
        bool hit = false;
        std::size_t best_pos = 0;
        std::size_t best_end = 0;
        for (const char* marker : kListMarkers) {
            std::size_t pos = low.rfind(marker);
            if (pos != std::string::npos && (!hit || pos > best_pos)) {
                hit = true;
                best_pos = pos;
                best_end = pos + std::char_traits<char>::length(marker);
            }
        }
        if (hit) {
            marker_line = static_cast<int>(li);
            marker_pos = best_pos;
            marker_end = best_end;
        }
    }
    std::string content;
    if (marker_line >= 0) {
        const std::string& line = lines[marker_line];
        // "The sorted words are: ant bee cat" -- the list follows the last
        // colon after the marker; without one it follows the marker itself.
        const std::size_t colon = line.rfind(':');
        if (colon != std::string::npos && colon >= marker_pos) {
            content = line.substr(colon + 1);
        } else {
            content = line.substr(std::min(marker_end, line.size()));
            std::size_t b = 0;
            while (b < content.size() &&
                   (std::isspace(static_cast<unsigned char>(content[b])) ||
                    std::string("*-.\"'").find(content[b]) != std::string::npos)) {
                ++b;
            }
            content = content.substr(b);
            for (const char* filler : {"is ", "are "}) {
                if (lower(content).rfind(filler, 0) == 0) {
                    content = content.substr(std::char_traits<char>::length(filler));
                    break;
                }
            }
        }
        if (tokenize_words(content).empty()) {
            // The list may sit on the following line ("Answer:\napple banana").
            for (std::size_t li = marker_line + 1; li < lines.size(); ++li) {
                if (!tokenize_words(lines[li]).empty()) {
                    content = lines[li];
                    break;
                }
            }
        }
    } else {
        for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
            if (!tokenize_words(*it).empty()) {
                content = *it;
                break;
            }
        }
    }
    auto tokens = tokenize_words(content);
    if (tokens.empty()) return std::nullopt;
    return NormalizedAnswer::of_words(std::move(tokens));
}

bool is_choice_letter(char c) {
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return up >= 'A' && up <= 'E';
}

const char* kChoiceMarkers[] = {"answer:", "answer :", "answer is", "answer was", "option:",
                                "option is", "choice:", "choice is", "choose"};

std::optional<NormalizedAnswer> extract_choice(const std::string& raw) {
    const std::string hay = lower(raw);
    std::optional<std::size_t> best_pos;
    char best = 0;
    // Parenthesized letters: "(B)".
    for (std::size_t i = 0; i + 2 < raw.size(); ++i) {
        if (raw[i] == '(' && is_choice_letter(raw[i + 1]) && raw[i + 2] == ')') {
            best_pos = i + 1;
            best = raw[i + 1];
        }
    }
    // Letters following an answer marker: "Answer: B", "the answer is b.".
    for (const char* marker : kChoiceMarkers) {
        std::size_t from = 0;
        while (true) {
            std::size_t pos = hay.find(marker, from);
            if (pos == std::string::npos) break;
            std::size_t i = pos + std::char_traits<char>::length(marker);
            while (i < raw.size() && (std::isspace(static_cast<unsigned char>(raw[i])) ||
                                      std::string(":*(\"'").find(raw[i]) != std::string::npos)) {
                ++i;
            }
            if (i < raw.size() && is_choice_letter(raw[i]) &&
                (i + 1 >= raw.size() || !std::isalnum(static_cast<unsigned char>(raw[i + 1])))) {
                if (!best_pos || i >= *best_pos) {
                    best_pos = i;
                    best = raw[i];
                }
            }
            from = pos + 1;
        }
    }
    if (!best_pos) {
        // A bare letter as the whole output.
        const std::string t = trim(raw);
        if (t.size() == 1 && is_choice_letter(t[0])) return NormalizedAnswer::of_choice(t[0]);
        return std::nullopt;
    }
    return NormalizedAnswer::of_choice(best);
}

}  // namespace

std::optional<NormalizedAnswer> extract_answer(TaskKind task, const std::string& raw) {
    switch (task) {
        case TaskKind::object_counting:
        case TaskKind::gsm8k:
        case TaskKind::svamp:
            return extract_number(raw);
        case TaskKind::word_sorting:
            return extract_word_list(raw);
        case TaskKind::aquarat:
            return extract_choice(raw);
    }
    return std::nullopt;
}

NormalizedAnswer gold_number(const std::string& raw) {
    auto canon = canonicalize_number(raw);
    if (!canon) throw DatasetError("malformed numeric gold answer: \"" + raw + "\"");
    NormalizedAnswer a;
    a.kind = NormalizedAnswer::Kind::number;
    a.number = *canon;
    return a;
}

NormalizedAnswer gold_words(const std::string& space_separated) {
    std::istringstream in(space_separated);
    std::vector<std::string> tokens;
    std::string token;
    while (in >> token) tokens.push_back(token);
    if (tokens.empty()) throw DatasetError("empty word-list gold answer");
    return NormalizedAnswer::of_words(std::move(tokens));
}

NormalizedAnswer gold_choice(const std::string& letter) {
    const std::string t = trim(letter);
    if (t.size() != 1 || !is_choice_letter(t[0])) {
        throw DatasetError("malformed choice gold answer: \"" + letter + "\"");
    }
    return NormalizedAnswer::of_choice(t[0]);
}

NormalizedAnswer gold_from_gsm8k_solution(const std::string& solution) {
    std::size_t pos = solution.rfind("####");
    if (pos == std::string::npos) {
        throw DatasetError("gsm8k solution without '####' gold marker");
    }
    return gold_number(trim(solution.substr(pos + 4)));
}

namespace {

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("dataset file missing: " + path.string());
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception& ex) {
        throw DatasetError("corrupt dataset file " + path.string() + ": " + ex.what());
    }
}

std::vector<json> load_jsonl_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("dataset file missing: " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& ex) {
            throw DatasetError("corrupt record at " + path.string() + ":" +
                               std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

std::string make_id(TaskKind task, Split split, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s-%s-%05zu", to_string(task), to_string(split), index);
    return buf;
}

// Slice [begin, begin+count) of the source records, in file order.
template <typename Records, typename MakeQuery>
std::vector<Query> slice_records(const Records& records, std::size_t begin, std::size_t count,
                                 TaskKind task, Split split, const std::filesystem::path& path,
                                 MakeQuery make_query) {
    if (records.size() < begin + count) {
        throw SplitIntegrityError("split " + std::string(to_string(split)) + " of " +
                                  to_string(task) + " needs " + std::to_string(begin + count) +
                                  " records but " + path.string() + " has " +
                                  std::to_string(records.size()));
    }
    std::vector<Query> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(make_query(records[begin + i], make_id(task, split, i)));
    }
    return out;
}

// Whole-file split: the record count must equal the declared size exactly.
template <typename Records, typename MakeQuery>
std::vector<Query> whole_file_records(const Records& records, std::size_t count, TaskKind task,
                                      Split split, const std::filesystem::path& path,
                                      MakeQuery make_query) {
    if (records.size() != count) {
        throw SplitIntegrityError("split " + std::string(to_string(split)) + " of " +
                                  to_string(task) + " declares " + std::to_string(count) +
                                  " records but " + path.string() + " has " +
                                  std::to_string(records.size()));
    }
    return slice_records(records, 0, count, task, split, path, make_query);
}

std::vector<Query> load_bbh(TaskKind task, Split split, const std::filesystem::path& data_dir) {
    const auto path = data_dir / to_string(task) / (std::string(to_string(task)) + ".json");
    json doc = load_json_file(path);
    if (!doc.is_object() || !doc.contains("examples") || !doc.at("examples").is_array()) {
        throw DatasetError("BBH task file without an \"examples\" array: " + path.string());
    }
    std::vector<json> records(doc.at("examples").begin(), doc.at("examples").end());
    const SplitSpec spec = split_spec(task);
    std::size_t begin = 0;
    if (split == Split::validation) begin = spec.train;
    if (split == Split::test) begin = spec.train + spec.validation;
    auto make_query = [&](const json& r, std::string id) {
        Query q;
        q.id = std::move(id);
        q.task = task;
        q.text = r.value("input", "");
        if (q.text.empty()) throw DatasetError("BBH record without input in " + path.string());
        const std::string target = r.value("target", "");
        q.gold = (task == TaskKind::object_counting) ? gold_number(target) : gold_words(target);
        return q;
    };
    return slice_records(records, begin, spec.size_of(split), task, split, path, make_query);
}

std::vector<Query> load_gsm8k(Split split, const std::filesystem::path& data_dir) {
    const SplitSpec spec = split_spec(TaskKind::gsm8k);
    const auto dir = data_dir / "gsm8k";
    auto make_query = [&](const json& r, std::string id) {
        Query q;
        q.id = std::move(id);
        q.task = TaskKind::gsm8k;
        q.text = r.value("question", "");
        if (q.text.empty()) throw DatasetError("gsm8k record without question");
        q.gold = gold_from_gsm8k_solution(r.value("answer", ""));
        return q;
    };
    if (split == Split::test) {
        const auto path = dir / "test.jsonl";
        return whole_file_records(load_jsonl_file(path), spec.test, TaskKind::gsm8k, split, path,
                                  make_query);
    }
    const auto path = dir / "train.jsonl";
    auto records = load_jsonl_file(path);
    const std::size_t begin = (split == Split::train) ? 0 : spec.train;
    return slice_records(records, begin, spec.size_of(split), TaskKind::gsm8k, split, path,
                         make_query);
}

std::vector<Query> load_svamp(Split split, const std::filesystem::path& data_dir) {
    const SplitSpec spec = split_spec(TaskKind::svamp);
    const auto dir = data_dir / "svamp";
    auto make_query = [&](const json& r, std::string id) {
        Query q;
        q.id = std::move(id);
        q.task = TaskKind::svamp;
        const std::string body = trim(r.value("Body", ""));
        const std::string question = trim(r.value("Question", ""));
        q.text = body.empty() ? question : body + " " + question;
        if (q.text.empty()) throw DatasetError("svamp record without Body/Question");
        if (!r.contains("Answer")) throw DatasetError("svamp record without Answer");
        const json& ans = r.at("Answer");
        q.gold = gold_number(ans.is_string() ? ans.get<std::string>() : ans.dump());
        return q;
    };
    if (split == Split::test) {
        const auto path = dir / "test.json";
        json doc = load_json_file(path);
        if (!doc.is_array()) throw DatasetError("svamp test file is not an array: " + path.string());
        std::vector<json> records(doc.begin(), doc.end());
        return whole_file_records(records, spec.test, TaskKind::svamp, split, path, make_query);
    }
    const auto path = dir / "trainval.json";
    json doc = load_json_file(path);
    if (!doc.is_array()) throw DatasetError("svamp trainval file is not an array: " + path.string());
    std::vector<json> records(doc.begin(), doc.end());
    const std::size_t begin = (split == Split::train) ? 0 : spec.train;
    return slice_records(records, begin, spec.size_of(split), TaskKind::svamp, split, path,
                         make_query);
}

std::vector<Query> load_aquarat(Split split, const std::filesystem::path& data_dir) {
    const SplitSpec spec = split_spec(TaskKind::aquarat);
    const auto dir = data_dir / "aquarat";
    const char* file = split == Split::train ? "train.jsonl"
                       : split == Split::validation ? "dev.jsonl"
                                                    : "test.jsonl";
    const auto path = dir / file;
    auto make_query = [&](const json& r, std::string id) {
        Query q;
        q.id = std::move(id);
        q.task = TaskKind::aquarat;
        std::string text = r.value("question", "");
        if (text.empty()) throw DatasetError("aquarat record without question");
        if (r.contains("options") && r.at("options").is_array()) {
            text += "\nOptions:";
            for (const auto& opt : r.at("options")) {
                text += "\n";
                text += opt.get<std::string>();
            }
        }
        q.text = std::move(text);
        q.gold = gold_choice(r.value("correct", ""));
        return q;
    };
    return whole_file_records(load_jsonl_file(path), spec.size_of(split), TaskKind::aquarat, split,
                              path, make_query);
}

}  // namespace

std::vector<Query> load_split(TaskKind dataset, Split split,
                              const std::filesystem::path& data_dir) {
    switch (dataset) {
        case TaskKind::object_counting:
        case TaskKind::word_sorting:
            return load_bbh(dataset, split, data_dir);
        case TaskKind::gsm8k:
            return load_gsm8k(split, data_dir);
        case TaskKind::svamp:
            return load_svamp(split, data_dir);
        case TaskKind::aquarat:
            return load_aquarat(split, data_dir);
    }
    throw UnsupportedTaskError("unknown dataset");
}

}  // namespace promptloop
