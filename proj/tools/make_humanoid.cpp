#include <iostream>

#include "ppaview/actor_model.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_humanoid <out.obj>\n";
        return 2;
    }
    const ppaview::TriangleMesh mesh = ppaview::make_humanoid_mesh();
    ppaview::save_obj(mesh, argv[1]);
    std::cout << mesh.size() << " triangles written to " << argv[1] << '\n';
    return 0;
}
