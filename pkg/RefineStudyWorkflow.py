import asyncio
from datetime import timedelta

from temporalio import workflow

with workflow.unsafe.imports_passed_through():
    from activities import load_study, refine_study_level
    from dataobjects import RefineStudyParams


@workflow.defn
class RefineStudyWorkflow:

    def __init__(self) -> None:
        self._done = 0
        self._levels = 0

    @workflow.run
    async def run(self, input: RefineStudyParams) -> str:
        self._levels = input.refine_levels + 1
        workflow.logger.info(f"Refinement study of {input.fixture}: {self._levels} levels from n={input.base_cells}")

        async def one(level: int):
            row = await workflow.execute_activity(
                refine_study_level,
                args=[input, level],
                start_to_close_timeout=timedelta(seconds=600),
                heartbeat_timeout=timedelta(seconds=300),
            )
            self._done += 1
            return row

        # levels are independent solves; fan them out
        rows = await asyncio.gather(*(one(level) for level in range(self._levels)))

        target = await workflow.execute_activity(
            load_study,
            args=[input, list(rows)],
            start_to_close_timeout=timedelta(seconds=60),
        )
        certified = all(r.certified for r in rows)
        workflow.logger.info(f"Study written to {target}, all certified: {certified}")
        return f"{target} certified={certified}"

    @workflow.query
    def progress(self) -> int:
        return 100 * self._done // self._levels if self._levels else 0
