"""HTTP service wrapping the library; see ``gradlap.service.app``."""
