#include <iostream>

#include "commands.hpp"
#include "mvxray/errors.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Multi-view X-ray detection geometry toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mvxray 0.1.0");

    mvx::cli::add_synth_gen(app);
    mvx::cli::add_compute_weights(app);
    mvx::cli::add_pool(app);
    mvx::cli::add_roi_pool(app);
    mvx::cli::add_cluster_anchors(app);
    mvx::cli::add_anchor_quality(app);
    mvx::cli::add_gen3d(app);
    mvx::cli::add_reproject(app);
    mvx::cli::add_eval(app);
    mvx::cli::add_iou_convert(app);
    mvx::cli::add_nms3d(app);
    mvx::cli::add_bench(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every other parse failure is a usage error.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mvx::ConfigError& e) {
        std::cerr << "mvxray: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const mvx::Error& e) {
        std::cerr << "mvxray: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mvxray: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
