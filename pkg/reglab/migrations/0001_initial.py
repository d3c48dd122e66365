# Generated by Django 5.2.4 on 2026-10-18 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RateStudy',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100, unique=True)),
                ('problem', models.CharField(max_length=20)),
                ('penalty', models.CharField(max_length=30)),
                ('rule', models.CharField(max_length=20)),
                ('seed', models.IntegerField(default=0)),
                ('config', models.JSONField(default=dict)),
                ('fitted_slopes', models.JSONField(default=dict)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name_plural': 'rate studies',
                'ordering': ['-created_at', 'name'],
            },
        ),
        migrations.CreateModel(
            name='RateStudyRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('delta', models.FloatField()),
                ('alpha', models.FloatField()),
                ('admissible', models.BooleanField()),
                ('discrepancy', models.FloatField()),
                ('error_norm', models.FloatField()),
                ('d_j', models.FloatField()),
                ('d_j_sym', models.FloatField()),
                ('d_g', models.FloatField()),
                ('d_f', models.FloatField()),
                ('sym_residual', models.FloatField(null=True)),
                ('study', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='reglab.ratestudy')),
            ],
            options={
                'ordering': ['study', '-delta'],
                'unique_together': {('study', 'delta')},
            },
        ),
    ]
