import nox
import nox_poetry

nox.options.sessions = ["tests"]
nox.options.error_on_missing_interpreters = True


@nox_poetry.session
def tests(session):
    session.install(".")
    session.run(
        "pytest",
        "tests/",
        "-v",
        "--cov=dcflow/",
        "-m",
        "not slow",
        external=True,
    )


@nox_poetry.session
def slow(session):
    session.install(".")
    session.run("pytest", "tests/integration", "-v", "-m", "slow", external=True)
