"""Create runs and seed_results tables

Revision ID: 3f1c2a9d7b10
Revises: 
Create Date: 2026-10-19 10:12:44.518203

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision: str = '3f1c2a9d7b10'
down_revision: Union[str, None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    """Upgrade schema."""
    op.create_table(
        'runs',
        sa.Column('id', sa.Integer(), nullable=False),
        sa.Column('name', sa.String(), nullable=True),
        sa.Column('method', sa.String(), nullable=True),
        sa.Column('parameter', sa.String(), nullable=True),
        sa.Column('config_hash', sa.String(), nullable=True),
        sa.Column('config_text', sa.Text(), nullable=True),
        sa.Column('degraded', sa.Boolean(), nullable=True),
        sa.Column('mean_score', sa.Float(), nullable=True),
        sa.Column('record_path', sa.String(), nullable=True),
        sa.Column('record_json', sa.Text(), nullable=True),
        sa.Column('wall_clock', sa.Float(), nullable=True),
        sa.PrimaryKeyConstraint('id'),
    )
    op.create_index(op.f('ix_runs_id'), 'runs', ['id'], unique=False)
    op.create_index(op.f('ix_runs_method'), 'runs', ['method'], unique=False)
    op.create_index(op.f('ix_runs_config_hash'), 'runs', ['config_hash'], unique=False)
    op.create_table(
        'seed_results',
        sa.Column('id', sa.Integer(), nullable=False),
        sa.Column('run_id', sa.Integer(), nullable=True),
        sa.Column('seed_index', sa.Integer(), nullable=True),
        sa.Column('seed', sa.String(), nullable=True),
        sa.Column('win_rate', sa.Float(), nullable=True),
        sa.Column('mean_return', sa.Float(), nullable=True),
        sa.Column('attacked_steps', sa.String(), nullable=True),
        sa.Column('mean_total_steps', sa.Float(), nullable=True),
        sa.Column('failed', sa.Boolean(), nullable=True),
        sa.Column('error', sa.String(), nullable=True),
        sa.ForeignKeyConstraint(['run_id'], ['runs.id']),
        sa.PrimaryKeyConstraint('id'),
    )
    op.create_index(op.f('ix_seed_results_id'), 'seed_results', ['id'], unique=False)


def downgrade() -> None:
    """Downgrade schema."""
    op.drop_index(op.f('ix_seed_results_id'), table_name='seed_results')
    op.drop_table('seed_results')
    op.drop_index(op.f('ix_runs_config_hash'), table_name='runs')
    op.drop_index(op.f('ix_runs_method'), table_name='runs')
    op.drop_index(op.f('ix_runs_id'), table_name='runs')
    op.drop_table('runs')
