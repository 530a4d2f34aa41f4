import os
import sys

# When ctest points us at a freshly built module, drop any editable-install
# redirect so that build is the one imported.
_stage = os.environ.get("GAZELAB_STAGE")
if _stage:
    sys.meta_path[:] = [f for f in sys.meta_path if "editable" not in type(f).__module__]
    sys.path.insert(0, _stage)
