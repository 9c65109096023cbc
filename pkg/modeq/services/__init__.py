"""Series arithmetic, modular forms and modular equation pipelines."""
