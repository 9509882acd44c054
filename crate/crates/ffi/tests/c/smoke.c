#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lftex.h"

static const char *SCENE =
    "{\"model\": {\"diameter\": 7}, \"objects\": ["
    "{\"shape\": \"sphere\", \"dims\": [2], \"position\": [0, 0, 0], \"color\": \"White\"}]}";

int main(void) {
    LfScene *scene = NULL;
    if (lf_scene_from_json(SCENE, &scene) != LF_STATUS_OK) {
        fprintf(stderr, "scene: %s\n", lf_last_error());
        return 1;
    }
    LfModel model;
    lf_scene_model(scene, &model);

    LfSynthOptions opts = {{16, 8, 4, 4}, 1, LF_SUPERSAMPLE_NONE, 0, LF_FORMAT_RGB8};
    LfTexture *tex = NULL;
    if (lf_texture_synthesize(scene, &opts, &tex) != LF_STATUS_OK) {
        fprintf(stderr, "synth: %s\n", lf_last_error());
        return 1;
    }

    LfCamera cam = {{10, 0, 0}, {-1, 0, 0}, {0, 0, 0}, 60.0, 16, 16, 0};
    LfImage *view = NULL, *direct = NULL;
    if (lf_render_view(tex, &model, &cam, &view) != LF_STATUS_OK ||
        lf_render_direct(scene, &cam, &direct) != LF_STATUS_OK) {
        fprintf(stderr, "render: %s\n", lf_last_error());
        return 1;
    }
    double db = 0.0;
    lf_psnr(view, direct, &db);

    cam.position.x = 1.0;
    LfImage *none = NULL;
    int refused = lf_render_view(tex, &model, &cam, &none) == LF_STATUS_PRECONDITION && none == NULL;

    printf("%ux%u psnr=%.2f refused=%d\n", lf_image_width(view), lf_image_height(view), db, refused);
    lf_image_free(view);
    lf_image_free(direct);
    lf_texture_free(tex);
    lf_scene_free(scene);
    return (isfinite(db) && refused) ? 0 : 1;
}
