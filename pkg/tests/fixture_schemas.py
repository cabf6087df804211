"""Fixture database schemas shared by schema, prompt, and pipeline tests."""

from gred.schemadb import Column, DatabaseSchema, ForeignKey, Table


def hr_schema() -> DatabaseSchema:
    return DatabaseSchema(
        db_id="hr_1",
        tables=(
            Table(
                "departments",
                (
                    Column("Dept_ID", "number"),
                    Column("Dept_NAME", "text"),
                    Column("Manager_ID", "number"),
                    Column("Location_ID", "number"),
                ),
            ),
            Table(
                "job_history",
                (
                    Column("employee_id", "number"),
                    Column("START_DATE", "time"),
                    Column("END_DATE", "time"),
                    Column("JOB_ID", "text"),
                    Column("Dept_ID", "number"),
                ),
            ),
            Table(
                "jobs",
                (
                    Column("JOB_ID", "text"),
                    Column("JOB_TITLE", "text"),
                    Column("minimum_salary", "number"),
                    Column("maximum_salary", "number"),
                ),
            ),
        ),
        foreign_keys=(
            ForeignKey("job_history", "JOB_ID", "jobs", "JOB_ID"),
            ForeignKey("job_history", "Dept_ID", "departments", "Dept_ID"),
        ),
    )


HR_SCHEMA_BLOCK = (
    "# Table departments, columns = [ * , Dept_ID , Dept_NAME , Manager_ID , Location_ID ]\n"
    "# Table job_history, columns = [ * , employee_id , START_DATE , END_DATE , JOB_ID , Dept_ID ]\n"
    "# Table jobs, columns = [ * , JOB_ID , JOB_TITLE , minimum_salary , maximum_salary ]\n"
    "# Foreign_keys = [ job_history.JOB_ID = jobs.JOB_ID , job_history.Dept_ID = departments.Dept_ID ]"
)


def pets_schema() -> DatabaseSchema:
    return DatabaseSchema(
        db_id="pets_1",
        tables=(
            Table("Has_Pet", (Column("StuID", "number"), Column("PetID", "number"))),
            Table(
                "Pets",
                (
                    Column("PetID", "number"),
                    Column("PetType", "text"),
                    Column("pet_age", "number"),
                    Column("weight", "number"),
                ),
            ),
            Table(
                "Student",
                (
                    Column("StuID", "number"),
                    Column("LName", "text"),
                    Column("Fname", "text"),
                    Column("Age", "number"),
                    Column("Sex", "text"),
                    Column("Major", "number"),
                    Column("Advisor", "number"),
                    Column("city_code", "text"),
                ),
            ),
        ),
        foreign_keys=(
            ForeignKey("Has_Pet", "StuID", "Student", "StuID"),
            ForeignKey("Has_Pet", "PetID", "Pets", "PetID"),
        ),
    )


PETS_SCHEMA_BLOCK = (
    "# Table Has_Pet, columns = [ * , StuID , PetID ]\n"
    "# Table Pets, columns = [ * , PetID , PetType , pet_age , weight ]\n"
    "# Table Student, columns = [ * , StuID , LName , Fname , Age , Sex , Major , Advisor , city_code ]\n"
    "# Foreign_keys = [ Has_Pet.StuID = Student.StuID , Has_Pet.PetID = Pets.PetID ]"
)


def employees_schema() -> DatabaseSchema:
    """Schema for the employees database used by the end-to-end fixtures."""
    return DatabaseSchema(
        db_id="hr_robust",
        tables=(
            Table(
                "employees",
                (
                    Column("Emp_ID", "number"),
                    Column("Fname", "text"),
                    Column("Lname", "text"),
                    Column("hire_date", "time"),
                    Column("salary", "number"),
                    Column("Dept_ID", "number"),
                    Column("JOB_ID", "text"),
                ),
            ),
            Table("departments", (Column("Dept_ID", "number"), Column("Dept_NAME", "text"))),
        ),
        foreign_keys=(ForeignKey("employees", "Dept_ID", "departments", "Dept_ID"),),
    )
