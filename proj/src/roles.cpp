#include "promptloop/roles.hpp"

#include "promptloop/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace promptloop {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::set<std::string> kKnownPlaceholders = {"query", "output", "prompt", "feedback", "gold"};

struct FrontMatterFile {
    std::map<std::string, std::string> header;
    std::string body;
};

FrontMatterFile parse_front_matter(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TemplateError("cannot open template file: " + path.string());
    FrontMatterFile out;
    std::string line;
    bool in_header = true;
    std::ostringstream body;
    bool first_body_line = true;
    while (std::getline(in, line)) {
        if (in_header) {
            if (trim(line) == "---") {
                in_header = false;
                continue;
            }
            auto colon = line.find(':');
            if (colon == std::string::npos) {
                throw TemplateError("bad header line in " + path.string() + ": " + line);
            }
            out.header[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
        } else {
            if (!first_body_line) body << '\n';
            body << line;
            first_body_line = false;
        }
    }
    if (in_header) throw TemplateError("missing '---' separator in " + path.string());
    out.body = trim(body.str());
    if (out.body.empty()) throw TemplateError("empty template body in " + path.string());
    return out;
}

std::set<std::string> parse_placeholder_list(const std::string& csv) {
    std::set<std::string> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (!kKnownPlaceholders.count(item)) {
            throw TemplateError("unknown placeholder declared: " + item);
        }
        out.insert(item);
    }
    return out;
}

}  // namespace

std::string render(const RoleTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
    for (const auto& name : tmpl.placeholders) {
        if (!bindings.count(name)) {
            throw TemplateError(std::string("missing binding for {") + name + "} in " +
                                to_string(tmpl.role_tag) + " template");
        }
    }
    std::string out = tmpl.user_template;
    for (const auto& [name, value] : bindings) {
        const std::string marker = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    for (const auto& name : kKnownPlaceholders) {
        if (out.find("{" + name + "}") != std::string::npos) {
            throw TemplateError(std::string("unresolved placeholder {") + name + "} after render");
        }
    }
    return out;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw TemplateError("template directory not found: " + dir.string());
    }
    TemplateSet set;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        FrontMatterFile fm = parse_front_matter(path);
        const std::string role = fm.header.count("role") ? fm.header.at("role") : "";
        if (role == "initial") {
            auto task = task_from_string(fm.header.count("task") ? fm.header.at("task") : "");
            if (!task) throw TemplateError("initial template without a valid task: " + path.string());
            set.initial_[*task] = fm.body;
            continue;
        }
        auto tag = role_from_string(role);
        if (!tag) throw TemplateError("template with unknown role '" + role + "': " + path.string());
        RoleTemplate tmpl;
        tmpl.role_tag = *tag;
        tmpl.user_template = fm.body;
        if (fm.header.count("system")) tmpl.system_text = fm.header.at("system");
        tmpl.placeholders = parse_placeholder_list(
            fm.header.count("placeholders") ? fm.header.at("placeholders") : "");
        // Every declared placeholder must actually appear in the body.
        for (const auto& name : tmpl.placeholders) {
            if (tmpl.user_template.find("{" + name + "}") == std::string::npos) {
                throw TemplateError("declared placeholder {" + name + "} absent from " +
                                    path.string());
            }
        }
        set.roles_[*tag] = std::move(tmpl);
    }
    for (RoleTag tag : {RoleTag::feedback, RoleTag::optimizer, RoleTag::verifier, RoleTag::judge}) {
        if (!set.roles_.count(tag)) {
            throw TemplateError(std::string("template directory is missing the '") +
                                to_string(tag) + "' template: " + dir.string());
        }
    }
    for (TaskKind task : {TaskKind::object_counting, TaskKind::word_sorting, TaskKind::gsm8k,
                          TaskKind::svamp, TaskKind::aquarat}) {
        if (!set.initial_.count(task)) {
            throw TemplateError(std::string("template directory is missing the initial prompt "
                                            "for task '") +
                                to_string(task) + "': " + dir.string());
        }
    }
    return set;
}

const RoleTemplate& TemplateSet::role(RoleTag tag) const {
    auto it = roles_.find(tag);
    if (it == roles_.end()) {
        throw TemplateError(std::string("no template loaded for role ") + to_string(tag));
    }
    return it->second;
}

PromptText TemplateSet::initial_prompt(TaskKind task) const {
    auto it = initial_.find(task);
    if (it == initial_.end()) {
        throw UnsupportedTaskError(std::string("no initial prompt for task ") + to_string(task));
    }
    return PromptText{it->second};
}

Verdict parse_verdict(const std::string& raw) {
    Verdict v;
    v.raw_judgment = raw;
    const std::string hay = lower(raw);
    const std::string correct = "verdict: correct";
    const std::string incorrect = "verdict: incorrect";
    const std::size_t last_correct = hay.rfind(correct);
    const std::size_t last_incorrect = hay.rfind(incorrect);
    if (last_incorrect != std::string::npos &&
        (last_correct == std::string::npos || last_incorrect > last_correct)) {
        v.value = Verdict::Value::incorrect;
    } else if (last_correct != std::string::npos) {
        v.value = Verdict::Value::correct;
    } else {
        v.value = Verdict::Value::unparseable;
    }
    return v;
}

std::string extract_optimized_prompt(const std::string& raw) {
    const std::string open = "<prompt>";
    const std::string close = "</prompt>";
    std::size_t start = raw.rfind(open);
    if (start != std::string::npos) {
        std::size_t body = start + open.size();
        std::size_t end = raw.find(close, body);
        if (end != std::string::npos) {
            std::string inner = raw.substr(body, end - body);
            std::size_t b = inner.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return {};
            std::size_t e = inner.find_last_not_of(" \t\r\n");
            return inner.substr(b, e - b + 1);
        }
    }
    std::size_t b = raw.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = raw.find_last_not_of(" \t\r\n");
    return raw.substr(b, e - b + 1);
}

}  // namespace promptloop
