"""Checks every shipped config against docs/config.schema.json."""
import glob
import json
import sys

import jsonschema

root = sys.argv[1]
with open(f"{root}/docs/config.schema.json") as f:
    schema = json.load(f)
jsonschema.Draft7Validator.check_schema(schema)
paths = sorted(glob.glob(f"{root}/configs/*.json"))
for path in paths:
    with open(path) as f:
        jsonschema.validate(json.load(f), schema)
for bad in ({"experiment": "pde_vs_ode"}, {"experiment": "constants", "colour": 1}, {"experiment": "x"}):
    try:
        jsonschema.validate(bad, schema)
    except jsonschema.ValidationError:
        continue
    sys.exit(f"schema accepted {bad}")
print(f"{len(paths)} configs valid")
