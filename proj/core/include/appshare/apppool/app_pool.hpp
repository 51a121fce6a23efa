#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::apppool {

struct AppEntry
{
    std::string app_name;
    std::string full_path;
    std::string username; ///< host account offered in replies
    bool shared = false;

    bool operator==(const AppEntry&) const = default;
};

/// Applications this host can offer, keyed by app_name.
///
/// Manifest format, one entry per line, `#` starts a comment:
///
///     app_name|full_path|username[|shared]
///
/// The optional fourth field is `shared` or `unshared`; entries without it
/// load unshared. save() always writes four fields so that sharing state
/// survives a reload.
class AppPool
{
public:
    static AppPool parse_manifest(std::string_view text);
    static AppPool load_manifest(const std::filesystem::path& path);

    std::string to_manifest() const;
    void save(const std::filesystem::path& path) const;

    /// Throws Error{DuplicateApp}.
    void add(AppEntry entry);

    /// Throws Error{UnknownApp}.
    void set_shared(std::string_view app_name, bool shared);

    const AppEntry* find(std::string_view app_name) const;

    bool is_shared(std::string_view app_name) const
    {
        const auto* e = find(app_name);
        return e != nullptr && e->shared;
    }

    std::vector<AppEntry> entries() const;
    std::size_t size() const noexcept { return apps_.size(); }
    bool empty() const noexcept { return apps_.empty(); }

private:
    std::map<std::string, AppEntry, std::less<>> apps_;
};

} // namespace appshare::apppool
