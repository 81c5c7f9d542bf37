#include "dockfix/enricher.hpp"

#include "dockfix/parser.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace dockfix {

std::optional<std::string> literalWordText(const AstNode& word) {
    std::string out;
    for (const auto& part : word.children()) {
        switch (part->kind()) {
        case NodeKind::BashLiteral:
            out += part->value().value_or("");
            break;
        case NodeKind::BashQuotedString: {
            for (const auto& inner : part->children()) {
                if (inner->kind() != NodeKind::BashLiteral) {
                    return std::nullopt;
                }
                out += inner->value().value_or("");
            }
            break;
        }
        default:
            return std::nullopt;
        }
    }
    return out;
}

std::vector<AstNode*> Enricher::Shape::positionals() const {
    std::vector<AstNode*> out;
    for (const auto& info : words) {
        if (info.role == WordRole::Positional) {
            out.push_back(info.word);
        }
    }
    return out;
}

AstNode* Enricher::Shape::valueOfFlagTag(const std::string& flag_tag) const {
    for (const auto& info : words) {
        if (info.role == WordRole::FlagValue && info.flag != nullptr &&
            info.flag->tag == flag_tag) {
            return info.word;
        }
    }
    return nullptr;
}

namespace {

std::string toUpperCopy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

FlagSchema flag(std::vector<std::string> names, std::string tag, bool takes_value = false,
                std::string value_tag = "", bool inline_value = false) {
    FlagSchema f;
    f.names = std::move(names);
    f.tag = std::move(tag);
    f.takes_value = takes_value;
    f.value_tag = std::move(value_tag);
    f.inline_value = inline_value;
    return f;
}

SubcommandSchema sub(std::vector<std::string> words, std::string tag,
                     std::vector<FlagSchema> flags = {}, std::string positional_role = "") {
    SubcommandSchema s;
    s.words = std::move(words);
    s.tag = std::move(tag);
    s.flags = std::move(flags);
    s.positional_role = std::move(positional_role);
    return s;
}

std::vector<CommandSchema> builtinSchemas() {
    std::vector<CommandSchema> out;

    {
        CommandSchema c;
        c.command_name = "apt-get";
        c.tag = "APT-GET";
        c.subcommands = {
            sub({"install"}, "APT-GET-INSTALL",
                {flag({"-y", "--yes", "--assume-yes"}, "APT-GET-INSTALL-Y-FLAG"),
                 flag({"--no-install-recommends"}, "APT-GET-INSTALL-NO-INSTALL-RECOMMENDS-FLAG"),
                 flag({"-q", "-qq", "--quiet"}, "APT-GET-INSTALL-QUIET-FLAG"),
                 flag({"-f", "--fix-broken"}, "APT-GET-INSTALL-FIX-BROKEN-FLAG"),
                 flag({"-t", "--target-release"}, "APT-GET-INSTALL-TARGET-RELEASE-FLAG", true)},
                "PACKAGE"),
            sub({"update"}, "APT-GET-UPDATE",
                {flag({"-y", "--yes"}, "APT-GET-UPDATE-Y-FLAG"),
                 flag({"-q", "-qq", "--quiet"}, "APT-GET-UPDATE-QUIET-FLAG")}),
            sub({"upgrade"}, "APT-GET-UPGRADE",
                {flag({"-y", "--yes"}, "APT-GET-UPGRADE-Y-FLAG")}),
            sub({"dist-upgrade"}, "APT-GET-DIST-UPGRADE",
                {flag({"-y", "--yes"}, "APT-GET-DIST-UPGRADE-Y-FLAG")}),
            sub({"remove"}, "APT-GET-REMOVE", {flag({"-y", "--yes"}, "APT-GET-REMOVE-Y-FLAG")},
                "PACKAGE"),
            sub({"purge"}, "APT-GET-PURGE", {flag({"-y", "--yes"}, "APT-GET-PURGE-Y-FLAG")},
                "PACKAGE"),
            sub({"clean"}, "APT-GET-CLEAN"),
            sub({"autoremove"}, "APT-GET-AUTOREMOVE",
                {flag({"-y", "--yes"}, "APT-GET-AUTOREMOVE-Y-FLAG")}),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "apt";
        c.tag = "APT";
        c.subcommands = {
            sub({"install"}, "APT-INSTALL",
                {flag({"-y", "--yes", "--assume-yes"}, "APT-INSTALL-Y-FLAG"),
                 flag({"--no-install-recommends"}, "APT-INSTALL-NO-INSTALL-RECOMMENDS-FLAG")},
                "PACKAGE"),
            sub({"update"}, "APT-UPDATE"),
            sub({"upgrade"}, "APT-UPGRADE", {flag({"-y", "--yes"}, "APT-UPGRADE-Y-FLAG")}),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "apk";
        c.tag = "APK";
        c.subcommands = {
            sub({"add"}, "APK-ADD",
                {flag({"--no-cache"}, "APK-ADD-NO-CACHE-FLAG"),
                 flag({"-U", "--update-cache", "--update"}, "APK-ADD-UPDATE-FLAG"),
                 flag({"--virtual", "-t"}, "APK-ADD-VIRTUAL-FLAG", true)},
                "PACKAGE"),
            sub({"del"}, "APK-DEL", {}, "PACKAGE"),
            sub({"update"}, "APK-UPDATE"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "yum";
        c.tag = "YUM";
        c.subcommands = {
            sub({"install"}, "YUM-INSTALL",
                {flag({"-y", "--assumeyes"}, "YUM-INSTALL-Y-FLAG"),
                 flag({"-q", "--quiet"}, "YUM-INSTALL-QUIET-FLAG")},
                "PACKAGE"),
            sub({"update"}, "YUM-UPDATE", {flag({"-y", "--assumeyes"}, "YUM-UPDATE-Y-FLAG")}),
            sub({"remove"}, "YUM-REMOVE", {flag({"-y", "--assumeyes"}, "YUM-REMOVE-Y-FLAG")},
                "PACKAGE"),
            sub({"clean"}, "YUM-CLEAN"),
        };
        out.push_back(std::move(c));
    }
    for (const char* pip : {"pip", "pip2", "pip3"}) {
        CommandSchema c;
        c.command_name = pip;
        c.tag = "PIP";
        c.subcommands = {
            sub({"install"}, "PIP-INSTALL",
                {flag({"--no-cache-dir"}, "PIP-INSTALL-NO-CACHE-DIR-FLAG"),
                 flag({"-U", "--upgrade"}, "PIP-INSTALL-UPGRADE-FLAG"),
                 flag({"-r", "--requirement"}, "PIP-INSTALL-REQUIREMENT-FLAG", true),
                 flag({"-e", "--editable"}, "PIP-INSTALL-EDITABLE-FLAG", true),
                 flag({"--index-url", "-i"}, "PIP-INSTALL-INDEX-URL-FLAG", true)},
                "PACKAGE"),
            sub({"uninstall"}, "PIP-UNINSTALL", {flag({"-y", "--yes"}, "PIP-UNINSTALL-Y-FLAG")},
                "PACKAGE"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "npm";
        c.tag = "NPM";
        c.subcommands = {
            sub({"cache", "clean"}, "NPM-CACHE-CLEAN",
                {flag({"-f", "--force"}, "NPM-F-FORCE")}),
            sub({"cache", "verify"}, "NPM-CACHE-VERIFY"),
            sub({"install"}, "NPM-INSTALL",
                {flag({"-g", "--global"}, "NPM-INSTALL-GLOBAL-FLAG"),
                 flag({"--production"}, "NPM-INSTALL-PRODUCTION-FLAG"),
                 flag({"--save-dev", "-D"}, "NPM-INSTALL-SAVE-DEV-FLAG")},
                "PACKAGE"),
            sub({"i"}, "NPM-INSTALL",
                {flag({"-g", "--global"}, "NPM-INSTALL-GLOBAL-FLAG")}, "PACKAGE"),
            sub({"ci"}, "NPM-CI"),
            sub({"run"}, "NPM-RUN"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "yarn";
        c.tag = "YARN";
        c.bare_subcommand_tag = "YARN-INSTALL";
        c.subcommands = {
            sub({"install"}, "YARN-INSTALL",
                {flag({"--frozen-lockfile"}, "YARN-INSTALL-FROZEN-LOCKFILE-FLAG"),
                 flag({"--production"}, "YARN-INSTALL-PRODUCTION-FLAG")}),
            sub({"add"}, "YARN-ADD", {}, "PACKAGE"),
            sub({"cache", "clean"}, "YARN-CACHE-CLEAN"),
            sub({"build"}, "YARN-BUILD"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "gem";
        c.tag = "GEM";
        c.subcommands = {
            sub({"update"}, "GEM-UPDATE",
                {flag({"--system"}, "GEM-UPDATE-SYSTEM-FLAG"),
                 flag({"--no-document", "--no-rdoc", "--no-ri", "-N"},
                      "GEM-UPDATE-NO-DOCUMENT-FLAG")},
                "PACKAGE"),
            sub({"install"}, "GEM-INSTALL",
                {flag({"--no-document", "--no-rdoc", "--no-ri", "-N"},
                      "GEM-INSTALL-NO-DOCUMENT-FLAG"),
                 flag({"-v", "--version"}, "GEM-INSTALL-VERSION-FLAG", true)},
                "PACKAGE"),
            sub({"cleanup"}, "GEM-CLEANUP"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "curl";
        c.tag = "CURL";
        c.bundled_short_flags = true;
        c.positional_role = "URL";
        c.flags = {
            flag({"-f", "--fail"}, "CURL-F-FAIL"),
            flag({"-L", "--location"}, "CURL-L-LOCATION"),
            flag({"-s", "--silent"}, "CURL-S-SILENT"),
            flag({"-S", "--show-error"}, "CURL-SHOW-ERROR"),
            flag({"-o", "--output"}, "CURL-O-OUTPUT-FLAG", true),
            flag({"-O", "--remote-name"}, "CURL-REMOTE-NAME-FLAG"),
            flag({"-H", "--header"}, "CURL-HEADER-FLAG", true),
            flag({"-k", "--insecure"}, "CURL-INSECURE-FLAG"),
            flag({"-X", "--request"}, "CURL-REQUEST-FLAG", true),
            flag({"-u", "--user"}, "CURL-USER-FLAG", true),
            flag({"--retry"}, "CURL-RETRY-FLAG", true),
            flag({"--connect-timeout"}, "CURL-CONNECT-TIMEOUT-FLAG", true),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "wget";
        c.tag = "WGET";
        c.positional_role = "URL";
        c.flags = {
            flag({"-O", "--output-document"}, "WGET-O-OUTPUT-FLAG", true),
            flag({"-q", "--quiet"}, "WGET-QUIET-FLAG"),
            flag({"--no-check-certificate"}, "WGET-NO-CHECK-CERTIFICATE-FLAG"),
            flag({"-r", "--recursive"}, "WGET-RECURSIVE-FLAG"),
            flag({"-P", "--directory-prefix"}, "WGET-DIRECTORY-PREFIX-FLAG", true),
            flag({"-nv", "--no-verbose"}, "WGET-NO-VERBOSE-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "tar";
        c.tag = "TAR";
        c.bundled_short_flags = true;
        c.old_style_bundle = true;
        c.flags = {
            flag({"-x", "--extract"}, "TAR-EXTRACT-FLAG"),
            flag({"-c", "--create"}, "TAR-CREATE-FLAG"),
            flag({"-z", "--gzip"}, "TAR-GZIP-FLAG"),
            flag({"-j", "--bzip2"}, "TAR-BZIP2-FLAG"),
            flag({"-J", "--xz"}, "TAR-XZ-FLAG"),
            flag({"-v", "--verbose"}, "TAR-VERBOSE-FLAG"),
            flag({"-f", "--file"}, "TAR-FILE-FLAG", true, "TAR-FILE"),
            flag({"-C", "--directory"}, "TAR-DIRECTORY-FLAG", true),
            flag({"--strip-components"}, "TAR-STRIP-COMPONENTS-FLAG", true),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "gpg";
        c.tag = "GPG";
        c.flags = {
            flag({"--batch"}, "GPG-BATCH-FLAG"),
            flag({"--no-tty"}, "GPG-NO-TTY-FLAG"),
            flag({"--verify"}, "GPG-VERIFY-FLAG"),
            flag({"--keyserver"}, "GPG-KEYSERVER-FLAG", true, "GPG-KEYSERVER-VALUE", true),
            flag({"--recv-keys", "--recv-key"}, "GPG-RECV-KEYS-FLAG"),
            flag({"-a", "--armor"}, "GPG-ARMOR-FLAG"),
            flag({"--import"}, "GPG-IMPORT-FLAG"),
            flag({"--export"}, "GPG-EXPORT-FLAG"),
            flag({"--dearmor"}, "GPG-DEARMOR-FLAG"),
            flag({"-o", "--output"}, "GPG-OUTPUT-FLAG", true),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "mkdir";
        c.tag = "MKDIR";
        c.positional_role = "PATH";
        c.flags = {
            flag({"-p", "--parents"}, "MKDIR-P-FLAG"),
            flag({"-m", "--mode"}, "MKDIR-MODE-FLAG", true),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "rm";
        c.tag = "RM";
        c.bundled_short_flags = true;
        c.positional_role = "PATH";
        c.flags = {
            flag({"-r", "-R", "--recursive"}, "RM-RECURSIVE-FLAG"),
            flag({"-f", "--force"}, "RM-F-FORCE-FLAG"),
            flag({"-v", "--verbose"}, "RM-VERBOSE-FLAG"),
            flag({"-d", "--dir"}, "RM-DIR-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "cd";
        c.tag = "CD";
        c.positional_role = "PATH";
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "mktemp";
        c.tag = "MKTEMP";
        c.positional_role = "PATH";
        c.flags = {
            flag({"-d", "--directory"}, "MKTEMP-D-FLAG"),
            flag({"-t"}, "MKTEMP-TEMPLATE-FLAG"),
            flag({"-p", "--tmpdir"}, "MKTEMP-TMPDIR-FLAG", true),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "sha256sum";
        c.tag = "SHA256SUM";
        c.positional_role = "PATH";
        c.flags = {
            flag({"-c", "--check"}, "SHA256SUM-C-CHECK-FLAG"),
            flag({"--status"}, "SHA256SUM-STATUS-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "echo";
        c.tag = "ECHO";
        c.flags = {
            flag({"-e"}, "ECHO-E-FLAG"),
            flag({"-n"}, "ECHO-N-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "configure";
        c.tag = "CONFIGURE";
        c.match_by_basename = true;
        c.flags = {
            flag({"--build"}, "CONFIGURE-BUILD-FLAG", true, "", true),
            flag({"--host"}, "CONFIGURE-HOST-FLAG", true, "", true),
            flag({"--prefix"}, "CONFIGURE-PREFIX-FLAG", true, "", true),
            flag({"--disable-static"}, "CONFIGURE-DISABLE-STATIC-FLAG"),
            flag({"--enable-shared"}, "CONFIGURE-ENABLE-SHARED-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "sudo";
        c.tag = "SUDO";
        c.wrapper = true;
        c.flags = {
            flag({"-E", "--preserve-env"}, "SUDO-PRESERVE-ENV-FLAG"),
            flag({"-H"}, "SUDO-SET-HOME-FLAG"),
            flag({"-u", "--user"}, "SUDO-USER-FLAG", true),
            flag({"-n", "--non-interactive"}, "SUDO-NON-INTERACTIVE-FLAG"),
        };
        out.push_back(std::move(c));
    }
    {
        CommandSchema c;
        c.command_name = "sh";
        c.tag = "SH";
        c.wrapper = true;
        c.match_by_basename = true;
        c.flags = {
            flag({"-c"}, "SH-C-FLAG"),
            flag({"-e"}, "SH-E-FLAG"),
            flag({"-x"}, "SH-X-FLAG"),
        };
        out.push_back(std::move(c));
    }
    return out;
}

bool allShortFlagChars(const std::string& text, const std::vector<const FlagSchema*>& flags,
                       std::size_t from, std::vector<const FlagSchema*>& decomposed) {
    decomposed.clear();
    for (std::size_t i = from; i < text.size(); ++i) {
        std::string short_name = std::string("-") + text[i];
        const FlagSchema* found = nullptr;
        for (const FlagSchema* f : flags) {
            for (const auto& n : f->names) {
                if (n == short_name) {
                    found = f;
                    break;
                }
            }
            if (found) {
                break;
            }
        }
        if (!found) {
            return false;
        }
        // A value-taking flag is only unambiguous as the final character.
        if (found->takes_value && i + 1 < text.size()) {
            return false;
        }
        decomposed.push_back(found);
    }
    return !decomposed.empty();
}

} // namespace

Enricher::Enricher() : schemas_(builtinSchemas()) {}

void Enricher::addSchema(CommandSchema schema) {
    for (auto& existing : schemas_) {
        if (existing.command_name == schema.command_name) {
            existing = std::move(schema);
            return;
        }
    }
    schemas_.push_back(std::move(schema));
}

const CommandSchema* Enricher::lookup(const std::string& name) const {
    for (const auto& s : schemas_) {
        if (s.command_name == name) {
            return &s;
        }
        if (s.match_by_basename) {
            std::size_t slash = name.find_last_of('/');
            if (slash != std::string::npos && name.substr(slash + 1) == s.command_name) {
                return &s;
            }
        }
    }
    return nullptr;
}

std::set<std::string> Enricher::vocabulary() const {
    std::set<std::string> out;
    for (const auto& s : schemas_) {
        out.insert(s.tag);
        if (!s.bare_subcommand_tag.empty()) {
            out.insert(s.bare_subcommand_tag);
        }
        if (!s.positional_role.empty()) {
            out.insert(s.positional_role);
        }
        auto addFlags = [&out](const std::vector<FlagSchema>& flags) {
            for (const auto& f : flags) {
                out.insert(f.tag);
                if (!f.value_tag.empty()) {
                    out.insert(f.value_tag);
                }
            }
        };
        addFlags(s.flags);
        for (const auto& sc : s.subcommands) {
            out.insert(sc.tag);
            if (!sc.positional_role.empty()) {
                out.insert(sc.positional_role);
            }
            addFlags(sc.flags);
        }
    }
    return out;
}

std::optional<Enricher::Shape> Enricher::analyze(AstNode& command,
                                                 std::size_t first_word) const {
    std::vector<AstNode*> words;
    for (const auto& c : command.children()) {
        if (c->kind() == NodeKind::BashCommandName || c->kind() == NodeKind::BashCommandArgs) {
            words.push_back(c.get());
        }
    }
    if (first_word >= words.size()) {
        return std::nullopt;
    }

    Shape shape;
    shape.command = &command;
    shape.words.reserve(words.size());
    for (AstNode* w : words) {
        WordInfo info;
        info.word = w;
        shape.words.push_back(info);
    }

    std::size_t idx = first_word;
    const CommandSchema* schema = nullptr;
    while (true) {
        auto name_text = literalWordText(*words[idx]);
        if (!name_text.has_value()) {
            break;
        }
        const CommandSchema* found = lookup(*name_text);
        if (found == nullptr) {
            break;
        }
        schema = found;
        shape.chain.push_back(found);
        shape.words[idx].role = WordRole::Name;
        shape.name_word_index = idx;
        if (!found->wrapper) {
            break;
        }
        // Wrapper: classify its own flags, then restart on the embedded
        // command. `sh -c` payloads are strings, handled elsewhere.
        std::size_t j = idx + 1;
        while (j < words.size()) {
            auto t = literalWordText(*words[j]);
            if (!t.has_value() || t->empty() || (*t)[0] != '-') {
                break;
            }
            const FlagSchema* matched = nullptr;
            for (const auto& f : found->flags) {
                for (const auto& n : f.names) {
                    if (n == *t) {
                        matched = &f;
                        break;
                    }
                }
                if (matched) {
                    break;
                }
            }
            shape.words[j].role = WordRole::WrapperFlag;
            shape.words[j].flag = matched;
            ++j;
            if (matched != nullptr && matched->takes_value && j < words.size()) {
                shape.words[j].role = WordRole::FlagValue;
                shape.words[j].flag = matched;
                ++j;
            }
        }
        if (found->command_name == "sh" || j >= words.size()) {
            break;
        }
        shape.wrapped = true;
        idx = j;
    }

    if (schema == nullptr) {
        return std::nullopt;
    }
    shape.schema = schema;
    shape.last_subcommand_word_index = shape.name_word_index;
    if (schema->wrapper) {
        return shape; // bare wrapper (or sh): no subcommand analysis
    }

    // Subcommand detection over leading non-flag literal args.
    std::vector<std::size_t> candidates;
    for (std::size_t i = shape.name_word_index + 1; i < shape.words.size(); ++i) {
        if (shape.words[i].role != WordRole::Unknown) {
            continue;
        }
        auto t = literalWordText(*shape.words[i].word);
        if (t.has_value() && !t->empty() && (*t)[0] != '-') {
            candidates.push_back(i);
        }
    }
    const SubcommandSchema* best = nullptr;
    for (const auto& sc : schema->subcommands) {
        if (sc.words.size() > candidates.size()) {
            continue;
        }
        bool ok = true;
        for (std::size_t k = 0; k < sc.words.size(); ++k) {
            auto t = literalWordText(*shape.words[candidates[k]].word);
            if (!t.has_value() || *t != sc.words[k]) {
                ok = false;
                break;
            }
        }
        if (ok && (best == nullptr || sc.words.size() > best->words.size())) {
            best = &sc;
        }
    }
    if (best != nullptr) {
        shape.subcommand = best;
        for (std::size_t k = 0; k < best->words.size(); ++k) {
            shape.words[candidates[k]].role = WordRole::Subcommand;
            shape.last_subcommand_word_index = candidates[k];
        }
    }

    // Flag and positional classification.
    std::vector<const FlagSchema*> flags;
    for (const auto& f : schema->flags) {
        flags.push_back(&f);
    }
    if (best != nullptr) {
        for (const auto& f : best->flags) {
            flags.push_back(&f);
        }
    }
    const FlagSchema* pending_value = nullptr;
    bool seen_nonflag = false;
    for (std::size_t i = shape.name_word_index + 1; i < shape.words.size(); ++i) {
        WordInfo& info = shape.words[i];
        if (info.role != WordRole::Unknown) {
            continue;
        }
        if (pending_value != nullptr) {
            info.role = WordRole::FlagValue;
            info.flag = pending_value;
            pending_value = nullptr;
            continue;
        }
        auto t = literalWordText(*info.word);
        if (!t.has_value()) {
            // Composite words still match long flags with inline values
            // (--prefix=$DIR, --build="$(gcc -print-multiarch)").
            if (info.word->childCount() > 0 &&
                info.word->child(0).kind() == NodeKind::BashLiteral &&
                info.word->child(0).value().has_value()) {
                const std::string& lead = *info.word->child(0).value();
                std::size_t eq = lead.find('=');
                if (lead.size() > 2 && lead[0] == '-' && lead[1] == '-' &&
                    eq != std::string::npos) {
                    std::string base = lead.substr(0, eq);
                    for (const FlagSchema* f : flags) {
                        for (const auto& n : f->names) {
                            if (n == base) {
                                info.role = WordRole::Flag;
                                info.flag = f;
                                break;
                            }
                        }
                        if (info.flag != nullptr) {
                            break;
                        }
                    }
                    if (info.flag == nullptr) {
                        info.role = WordRole::Flag;
                    }
                }
            }
            continue; // variables and substitutions are never guessed
        }
        const std::string& text = *t;
        if (text.size() > 1 && text[0] == '-' && text[1] == '-') {
            std::size_t eq = text.find('=');
            std::string base = eq == std::string::npos ? text : text.substr(0, eq);
            const FlagSchema* matched = nullptr;
            for (const FlagSchema* f : flags) {
                for (const auto& n : f->names) {
                    if (n == base) {
                        matched = f;
                        break;
                    }
                }
                if (matched) {
                    break;
                }
            }
            info.role = WordRole::Flag;
            info.flag = matched;
            if (matched != nullptr && matched->takes_value && eq == std::string::npos) {
                pending_value = matched;
            }
            continue;
        }
        if (text.size() > 1 && text[0] == '-') {
            const FlagSchema* matched = nullptr;
            for (const FlagSchema* f : flags) {
                for (const auto& n : f->names) {
                    if (n == text) {
                        matched = f;
                        break;
                    }
                }
                if (matched) {
                    break;
                }
            }
            if (matched != nullptr) {
                info.role = WordRole::Flag;
                info.flag = matched;
                if (matched->takes_value) {
                    pending_value = matched;
                }
                continue;
            }
            if (schema->bundled_short_flags) {
                std::vector<const FlagSchema*> decomposed;
                if (allShortFlagChars(text, flags, 1, decomposed)) {
                    info.role = WordRole::Flag;
                    info.bundled = decomposed;
                    if (decomposed.back()->takes_value) {
                        pending_value = decomposed.back();
                    }
                    continue;
                }
            }
            info.role = WordRole::Flag; // unknown flag, no tag
            continue;
        }
        // Old-style tar bundles: first bare word made entirely of flags.
        if (schema->old_style_bundle && !seen_nonflag) {
            std::vector<const FlagSchema*> decomposed;
            if (allShortFlagChars(text, flags, 0, decomposed)) {
                seen_nonflag = true;
                info.role = WordRole::Flag;
                info.bundled = decomposed;
                if (decomposed.back()->takes_value) {
                    pending_value = decomposed.back();
                }
                continue;
            }
        }
        seen_nonflag = true;
        info.role = WordRole::Positional;
    }
    return shape;
}

std::optional<Enricher::Shape> Enricher::shape(AstNode& command) const {
    if (command.kind() != NodeKind::BashCommand) {
        return std::nullopt;
    }
    return analyze(command, 0);
}

void Enricher::applyAnnotations(const Shape& shape) const {
    AstNode& cmd = *shape.command;
    for (const CommandSchema* s : shape.chain) {
        cmd.annotate(s->tag);
    }
    std::string positional_role;
    if (shape.schema != nullptr && !shape.schema->wrapper) {
        if (shape.subcommand != nullptr) {
            cmd.annotate(shape.subcommand->tag);
            positional_role = shape.subcommand->positional_role;
        } else {
            positional_role = shape.schema->positional_role;
            bool has_positional = false;
            for (const auto& info : shape.words) {
                if (info.role == WordRole::Positional) {
                    has_positional = true;
                    break;
                }
            }
            if (!shape.schema->bare_subcommand_tag.empty() && !has_positional) {
                cmd.annotate(shape.schema->bare_subcommand_tag);
            }
        }
    }
    for (const auto& info : shape.words) {
        switch (info.role) {
        case WordRole::Flag:
        case WordRole::WrapperFlag:
            if (info.flag != nullptr) {
                info.word->annotate(info.flag->tag);
            }
            for (const FlagSchema* f : info.bundled) {
                info.word->annotate(f->tag);
            }
            break;
        case WordRole::FlagValue:
            if (info.flag != nullptr && !info.flag->value_tag.empty()) {
                info.word->annotate(info.flag->value_tag);
            }
            break;
        case WordRole::Positional:
            if (!positional_role.empty()) {
                info.word->annotate(positional_role);
            }
            break;
        default:
            break;
        }
    }
}

bool Enricher::enrichShC(AstNode& command, const std::vector<AstNode*>& words) const {
    // Locate -c and the script string following it.
    std::size_t script_idx = 0;
    bool have_c = false;
    for (std::size_t i = 1; i < words.size(); ++i) {
        auto t = literalWordText(*words[i]);
        if (t.has_value() && *t == "-c") {
            have_c = true;
            continue;
        }
        if (have_c) {
            script_idx = i;
            break;
        }
    }
    if (!have_c || script_idx == 0) {
        return false;
    }
    AstNode* script_word = words[script_idx];
    auto content = literalWordText(*script_word);
    if (!content.has_value() || content->empty()) {
        return false;
    }
    std::vector<ParseDiagnostic> scratch;
    auto parsed = parseShellFragment(*content, script_word->span(), scratch);
    if (!parsed) {
        return false;
    }
    EnrichmentStats ignored;
    (void)ignored;
    // Enrich the detached script and fold its tags onto the argument node.
    AstNode& detached = *parsed;
    traverse(detached, [&](AstNode& n) {
        if (n.kind() == NodeKind::BashCommand) {
            enrichCommand(n);
        }
    });
    bool any = false;
    traverse(detached, [&](AstNode& n) {
        for (const auto& tag : n.annotations()) {
            script_word->annotate(tag);
            any = true;
        }
    });
    return any;
}

bool Enricher::enrichCommand(AstNode& command) const {
    auto s = analyze(command, 0);
    if (!s.has_value()) {
        return false;
    }
    applyAnnotations(*s);
    if (s->schema != nullptr && s->schema->command_name == "sh") {
        std::vector<AstNode*> words;
        for (const auto& c : command.children()) {
            if (c->kind() == NodeKind::BashCommandName ||
                c->kind() == NodeKind::BashCommandArgs) {
                words.push_back(c.get());
            }
        }
        enrichShC(command, words);
    }
    return true;
}

EnrichmentStats Enricher::enrich(AstNode& root) const {
    // The annotation vocabulary is enricher-owned, so a fresh pass starts
    // from a clean slate; this also makes re-enrichment after repair exact.
    traverse(root, [](AstNode& n) { n.clearAnnotations(); });
    EnrichmentStats stats;
    traverse(root, [&](AstNode& n) {
        if (n.kind() != NodeKind::BashCommand) {
            return;
        }
        ++stats.total_commands;
        if (enrichCommand(n)) {
            ++stats.annotated_commands;
        }
    });
    return stats;
}

AstNode* Enricher::enrichEmbedded(AstNode& command) const {
    if (command.kind() != NodeKind::BashCommand) {
        return nullptr;
    }
    std::vector<AstNode*> words;
    for (const auto& c : command.children()) {
        if (c->kind() == NodeKind::BashCommandName || c->kind() == NodeKind::BashCommandArgs) {
            words.push_back(c.get());
        }
    }
    if (words.empty()) {
        return nullptr;
    }
    auto name_text = literalWordText(*words[0]);
    if (!name_text.has_value()) {
        return nullptr;
    }
    const CommandSchema* schema = lookup(*name_text);
    if (schema == nullptr || !schema->wrapper) {
        return nullptr;
    }
    if (schema->command_name == "sh") {
        std::size_t script_idx = 0;
        bool have_c = false;
        for (std::size_t i = 1; i < words.size(); ++i) {
            auto t = literalWordText(*words[i]);
            if (t.has_value() && *t == "-c") {
                have_c = true;
                continue;
            }
            if (have_c) {
                script_idx = i;
                break;
            }
        }
        if (!have_c || script_idx == 0) {
            return nullptr;
        }
        if (!enrichShC(command, words)) {
            return nullptr;
        }
        return words[script_idx];
    }
    // sudo-style wrapper: the embedded command's annotations live on the
    // command node itself.
    auto s = analyze(command, 0);
    if (!s.has_value() || !s->wrapped) {
        return nullptr;
    }
    applyAnnotations(*s);
    return &command;
}

bool Enricher::loadSchemaFile(const std::string& path, std::string& error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        error = "cannot open schema file: " + path;
        return false;
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        error = std::string("invalid schema JSON: ") + e.what();
        return false;
    }
    if (!doc.is_object() || !doc.contains("commands") || !doc["commands"].is_array()) {
        error = "schema file must contain a top-level \"commands\" array";
        return false;
    }
    auto parseFlags = [](const nlohmann::json& arr) {
        std::vector<FlagSchema> flags;
        for (const auto& jf : arr) {
            FlagSchema f;
            for (const auto& n : jf.value("names", nlohmann::json::array())) {
                f.names.push_back(n.get<std::string>());
            }
            f.tag = jf.value("tag", "");
            f.takes_value = jf.value("takes_value", false);
            f.inline_value = jf.value("inline_value", false);
            f.value_tag = jf.value("value_tag", "");
            flags.push_back(std::move(f));
        }
        return flags;
    };
    try {
        for (const auto& jc : doc["commands"]) {
            CommandSchema c;
            c.command_name = jc.at("name").get<std::string>();
            c.tag = jc.value("tag", toUpperCopy(c.command_name));
            c.positional_role = jc.value("positional_role", "");
            c.wrapper = jc.value("wrapper", false);
            c.bundled_short_flags = jc.value("bundled_short_flags", false);
            c.old_style_bundle = jc.value("old_style_bundle", false);
            c.match_by_basename = jc.value("match_by_basename", false);
            c.bare_subcommand_tag = jc.value("bare_subcommand_tag", "");
            if (jc.contains("flags")) {
                c.flags = parseFlags(jc["flags"]);
            }
            if (jc.contains("subcommands")) {
                for (const auto& js : jc["subcommands"]) {
                    SubcommandSchema sc;
                    for (const auto& w : js.at("words")) {
                        sc.words.push_back(w.get<std::string>());
                    }
                    sc.tag = js.value("tag", "");
                    sc.positional_role = js.value("positional_role", "");
                    if (js.contains("flags")) {
                        sc.flags = parseFlags(js["flags"]);
                    }
                    c.subcommands.push_back(std::move(sc));
                }
            }
            addSchema(std::move(c));
        }
    } catch (const std::exception& e) {
        error = std::string("invalid schema record: ") + e.what();
        return false;
    }
    return true;
}

} // namespace dockfix
