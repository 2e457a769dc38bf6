// Regenerates the sample scenes shipped under scenes/.

#include <cstdio>
#include <filesystem>
#include <string>

#include "portalwave/scenegen.hpp"

using namespace portalwave;

int main(int argc, char **argv) {
    const std::string dir = argc > 1 ? argv[1] : "scenes";
    std::filesystem::create_directories(dir);
    const auto emit = [&](const std::string &name, const SceneDescription &scene) {
        const std::string path = dir + "/" + name + ".json";
        save_scene(scene, path);
        std::printf("wrote %s (%zu portals)\n", path.c_str(), scene.portals.size());
    };
    emit("two_room", scenegen::two_room());
    emit("three_room", scenegen::three_room());
    emit("courtyard", scenegen::courtyard());
    emit("corridor_u", scenegen::corridor_u());
    emit("room_series_8", scenegen::room_series(8));
    return 0;
}
