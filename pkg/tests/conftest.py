import hypothesis

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=60
)
hypothesis.settings.load_profile("suite")
