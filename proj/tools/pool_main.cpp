#include "appshare/apppool/app_pool.hpp"
#include "common.hpp"

#include <iostream>

using namespace appshare;

int main(int argc, char** argv)
{
    CLI::App app{"Inspect and edit the local application manifest"};
    app.require_subcommand(1);
    int status = 0;

    std::string manifest = "apps.manifest";
    app.add_option("--manifest", manifest, "app_name|full_path|username[|shared] per line")->capture_default_str();

    auto* list = app.add_subcommand("list", "Show every application and whether it is shared");
    list->callback(tools::guarded(status, [&] {
        for (const auto& e : apppool::AppPool::load_manifest(manifest).entries())
            std::cout << (e.shared ? "shared   " : "unshared ") << e.app_name << "  " << e.full_path << "  (" << e.username
                      << ")\n";
        return 0;
    }));

    std::string name;
    for (const bool shared : {true, false}) {
        auto* sub = app.add_subcommand(shared ? "share" : "unshare", shared ? "Offer an app to the cluster" : "Stop offering an app");
        sub->add_option("app", name)->required();
        sub->callback(tools::guarded(status, [&, shared] {
            auto pool = apppool::AppPool::load_manifest(manifest);
            pool.set_shared(name, shared);
            pool.save(manifest);
            return 0;
        }));
    }

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}
