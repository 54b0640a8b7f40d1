#include <math.h>
#include <stdio.h>
#include <string.h>

#include "scenegen.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, \
                    #cond, sg_last_error());                         \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    SgLexicon *lex = NULL;
    CHECK(sg_lexicon_default(&lex) == SG_STATUS_OK);

    char *filtered = NULL;
    CHECK(sg_filter(lex, "in stormy weather", &filtered) == SG_STATUS_OK);
    CHECK(strcmp(filtered, "in rainy weather") == 0);
    sg_string_free(filtered);
    CHECK(sg_filter(lex, "bake a cake", &filtered) == SG_STATUS_REJECTED);
    CHECK(strlen(sg_last_error()) > 0);

    const char *cfg =
        "scenario \"c\" {\n  duration_s: 2\n  actors {\n    pedestrians: 4\n  }\n}\n";
    SgDataset *ds = NULL;
    CHECK(sg_simulate(cfg, &ds) == SG_STATUS_OK);
    CHECK(sg_dataset_len(ds) == 4 * 21);

    SgStats stats;
    CHECK(sg_dataset_stats(ds, 0.0, &stats) == SG_STATUS_OK);
    CHECK(stats.total_frames == 21);
    CHECK(stats.avg_per_frame[1] == 4.0);

    SgMetrics m;
    double weights[3] = {0.20, 0.58, 0.22};
    CHECK(sg_metrics(ds, 6, 6, weights, &m) == SG_STATUS_OK);
    CHECK(isnan(m.ade[0]) && !isnan(m.ade[1]));

    CHECK(sg_simulate("scenario {", &ds) == SG_STATUS_PARSE);

    sg_dataset_free(ds);
    sg_lexicon_free(lex);
    puts("ok");
    return 0;
}
