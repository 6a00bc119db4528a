import hypothesis
import numpy as np

hypothesis.settings.register_profile(
    "default", max_examples=50, deadline=None
)
hypothesis.settings.register_profile(
    "thorough", max_examples=300, deadline=None
)
hypothesis.settings.load_profile("default")

np.seterr(all="raise", under="ignore")
