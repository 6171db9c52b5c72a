import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor

from temporalio.worker import Worker

from activities import extract, load, load_study, refine_study_level, transform, validate
from client import get_client, task_queue
from dataobjects import IDEMPOTENT_FILE
from IsotonePipelineWorkflow import IsotonePipelineWorkflow
from RefineStudyWorkflow import RefineStudyWorkflow


async def main():
    logging.basicConfig(level=logging.INFO)

    # Delete idempotent keys when worker starts
    if os.path.exists(IDEMPOTENT_FILE):
        os.remove(IDEMPOTENT_FILE)

    client = await get_client()
    queue = task_queue()

    # solver activities are CPU-bound and synchronous
    with ThreadPoolExecutor(max_workers=int(os.getenv("ORLICZ_ISOTONE_WORKERS", "4"))) as executor:
        handle = Worker(
            client,
            task_queue=queue,
            workflows=[IsotonePipelineWorkflow, RefineStudyWorkflow],
            activities=[validate, extract, transform, load, refine_study_level, load_study],
            activity_executor=executor,
        )
        print(f"Worker {queue} started, ctrl+c to exit")
        await handle.run()


if __name__ == "__main__":
    loop = asyncio.new_event_loop()
    try:
        loop.run_until_complete(main())
    except KeyboardInterrupt:
        loop.run_until_complete(loop.shutdown_asyncgens())
        print("\nShutting down workers")
