import logging
from typing import Callable

from src.models.run_models import Command, RunConfig

Handler = Callable[[RunConfig], int]


class CommandRouter:
    """Registry of command handlers; a handler returns the process exit status."""

    def __init__(self):
        self.routes: dict[Command, Handler] = {}

    def route(self, command: Command) -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            if command in self.routes:
                raise ValueError(f"Command {command.value} is already routed.")
            self.routes[command] = handler
            return handler

        return register

    def include_router(self, other: "CommandRouter") -> None:
        for command, handler in other.routes.items():
            self.route(command)(handler)

    def dispatch(self, config: RunConfig) -> int:
        handler = self.routes.get(config.command)
        if handler is None:
            raise ValueError(f"No handler for command {config.command.value}.")
        logging.debug(f"dispatching {config.command.value}")
        return handler(config)
