/* Compiled as C99 to keep the public header free of C++. */
#include "triviahg/triviahg.h"

#include <stdio.h>
#include <string.h>

int main(void) {
  const int valid[4] = {1, 0, 0, 1};
  double h = -1.0;
  thg_dataset* ds = NULL;

  if (thg_version()[0] == '\0') return 1;
  if (thg_hicos(valid, 4, 1, &h) != THG_OK) return 2;
  if (h < 0.749999 || h > 0.750001) return 3;
  if (thg_dataset_read(NULL, THG_LEVEL_RAW, &ds) != THG_E_INVALID_ARGUMENT) return 4;
  if (strlen(thg_last_error()) == 0) return 5;
  if (strcmp(thg_status_name(THG_E_PARSE), "parse") != 0) return 6;
  printf("C header ok (%s)\n", thg_version());
  return 0;
}
