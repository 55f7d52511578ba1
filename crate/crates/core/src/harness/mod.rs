//! Monte-Carlo orchestration, configuration, and the CLI surface.
