#ifndef DNET_SYNTHGEN_HPP
#define DNET_SYNTHGEN_HPP

#include <array>
#include <string>
#include <vector>

#include "dnet/data.hpp"
#include "dnet/image.hpp"

namespace dnet {

enum class SceneKind {
    uml_class,
    uml_sequence,
    shapes_circles,
    shapes_triangles,
    shapes_grid,
    shapes_blobs,
};

enum class ElementType {
    box_outline,     // a: x0,y0,x1,y1
    divider,         // a: x0,x1,y (full-width rule inside a class box)
    text_stroke,     // a: x0,x1,y (short horizontal pseudo-text)
    connector,       // a: x0,y0,x1,y1
    arrow_head_hollow, // a: tip x,y, base x, half-height
    lifeline_dashed, // a: x, y0, y1 (vertical, 4 on / 4 off)
    message_arrow,   // a: x0,x1,y (head at x1)
    activation_box,  // a: x0,y0,x1,y1 (white-filled, outlined)
    circle_outline,  // a: cx,cy,r
    triangle_filled, // a: x0,y0,x1,y1,x2,y2
    rect_filled,     // a: x0,y0,x1,y1
    grid_line,       // a: x0,y0,x1,y1 (solid axis-aligned)
    polyline_stroke, // pts
    blob_filled,     // pts (closed polygon)
};

struct Element {
    ElementType type;
    std::array<int, 8> a{};
    std::vector<std::pair<int, int>> pts;
    int value = 0;     // stroke/fill gray (dark: 0..96)
    int thickness = 1; // 1..2 px
};

// A scene is a pure function of (kind, seed): same seed, same elements.
struct SceneSpec {
    SceneKind kind;
    int canvas = 256; // render resolution before resizing
    uint64_t seed = 0;
    double noise_prob = 0.01; // salt-pepper, applied at output resolution
    std::vector<Element> elements;
};

// 2-6 class boxes (three compartments: exactly two full-width dividers,
// 1-4 short pseudo-text strokes per compartment) and 1-3 connectors between
// boxes in adjacent grid cells, some with hollow arrowheads.
SceneSpec make_class_scene(uint64_t seed, int canvas = 256);

// 2-5 lifelines (header box + dashed vertical line to near-bottom), 1-6
// horizontal message arrows between distinct lifelines, 0-3 activation
// boxes.
SceneSpec make_sequence_scene(uint64_t seed, int canvas = 256);

// Source-task classes dissimilar to UML: 0 circles, 1 filled triangles,
// 2 checkerboard/grid textures, 3 polylines/blobs.
SceneSpec make_shapes_scene(int class_id, uint64_t seed, int canvas = 256);

// Rasterises the element list onto a white canvas. No noise, no resize.
Image render_scene(const SceneSpec& spec);

// render -> bilinear resize to out_size -> seeded salt-pepper noise.
Image render_final(const SceneSpec& spec, int out_size);

Image gen_class_diagram(uint64_t seed, int out_size);
Image gen_sequence_diagram(uint64_t seed, int out_size);
Image gen_source_scene(int class_id, uint64_t seed, int out_size);

enum class DatasetKind { uml, shapes };

const std::vector<std::string>& dataset_labels(DatasetKind kind);

// Writes PGM images plus manifest.csv into out_dir. Per-image seed is
// child(seed, i). The uml kind alternates class/sequence for exact balance;
// shapes cycles its four classes round-robin.
DatasetManifest gen_dataset(DatasetKind kind, int64_t count, uint64_t seed,
                            const std::string& out_dir, int out_size);

} // namespace dnet

#endif
