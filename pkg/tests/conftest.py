from hypothesis import settings

settings.register_profile("stegcap", deadline=None, max_examples=60)
settings.load_profile("stegcap")
