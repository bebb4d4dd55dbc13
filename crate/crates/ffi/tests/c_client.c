#include <stdio.h>
#include <string.h>

#include "cybersick.h"

/* argv[1]: model file, argv[2]: protocol messages, one per line.
   Prints "classes N", a zero-vector prediction, one reply per message,
   then the status and message of a bad load. */
int main(int argc, char **argv) {
  if (argc != 3) return 64;
  CsModel *model = NULL;
  if (cs_model_load_file(argv[1], &model) != CS_STATUS_OK) {
    fprintf(stderr, "load: %s\n", cs_last_error());
    return 1;
  }
  printf("classes %zu\n", cs_model_class_count(model));
  printf("attribute17 %s\n", cs_attribute_name(17));

  double values[64] = {0};
  double dist[4] = {0};
  size_t label = 99;
  CsStatus st = cs_model_predict(model, values, cs_attribute_count(), dist, 4, &label);
  printf("predict %d %zu %.17g\n", (int)st, label, dist[0] + dist[1]);

  CsScorer *scorer = NULL;
  if (cs_scorer_new(model, 0.5, 5, &scorer) != CS_STATUS_OK) return 2;
  cs_model_free(model);

  FILE *in = fopen(argv[2], "r");
  if (!in) return 3;
  static char line[1 << 16];
  while (fgets(line, sizeof line, in)) {
    char *reply = NULL;
    if (cs_scorer_handle_line(scorer, line, &reply) != CS_STATUS_OK) return 4;
    printf("%s\n", reply);
    cs_string_free(reply);
  }
  fclose(in);
  cs_scorer_free(scorer);

  CsModel *bad = NULL;
  st = cs_model_load_str("not a model", &bad);
  printf("bad %d %s\n", (int)st, bad == NULL ? "null" : "set");
  printf("error %s\n", cs_last_error());
  return 0;
}
